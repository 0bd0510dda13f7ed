#include "stairkit/line_linker.hpp"

#include "stairkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace stairkit {

namespace {

bool decode_order(const CellDetection& a, const CellDetection& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.row != b.row) return a.row < b.row;
    return a.col < b.col;
}

bool grid_order(const CellDetection& a, const CellDetection& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
}

bool adjacent(const CellDetection& a, const CellDetection& b) {
    const auto dr = a.row > b.row ? a.row - b.row : b.row - a.row;
    const auto dc = a.col > b.col ? a.col - b.col : b.col - a.col;
    return dr <= 1 && dc <= 1;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
    while (parent[i] != i) {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    return i;
}

void unite(std::vector<std::size_t>& parent, std::size_t a, std::size_t b) {
    a = find_root(parent, a);
    b = find_root(parent, b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
}

void sort_by_mean_y(std::vector<LineEquation>& lines) {
    std::sort(lines.begin(), lines.end(), [](const LineEquation& a, const LineEquation& b) {
        if (a.mean_y() != b.mean_y()) return a.mean_y() < b.mean_y();
        if (a.kind != b.kind) return a.kind == LineKind::Convex;
        return a.k < b.k;
    });
}

}  // namespace

LinkerConfig LinkerConfig::for_geometry(const GridGeometry& geom) {
    LinkerConfig cfg;
    cfg.intersect_hi = static_cast<double>(geom.input_w);
    cfg.endpoint_close_px = 2.0 * geom.stride_h();
    return cfg;
}

void LinkerConfig::validate() const {
    if (!(confidence_threshold > 0.0 && confidence_threshold < 1.0))
        throw Error(fmt::format("confidence threshold {} must lie in (0, 1)", confidence_threshold));
    if (top_k < 2) throw Error(fmt::format("top_k {} must be at least 2", top_k));
    if (!(intersect_lo <= intersect_hi)) throw Error("intersect range is empty");
    if (endpoint_close_px < 0 || coincide_px < 0) throw Error("distance thresholds must be non-negative");
}

std::vector<LineEquation> LinkedLines::all() const {
    std::vector<LineEquation> out = convex.lines;
    out.insert(out.end(), concave.lines.begin(), concave.lines.end());
    sort_by_mean_y(out);
    return out;
}

std::vector<CellDetection> select_cells(std::span<const CellDetection> dets, const LinkerConfig& cfg) {
    std::vector<CellDetection> kept;
    for (const auto& d : dets)
        if (d.confidence >= cfg.confidence_threshold) kept.push_back(d);
    std::sort(kept.begin(), kept.end(), decode_order);
    if (kept.size() > cfg.top_k) kept.resize(cfg.top_k);
    return kept;
}

std::vector<CellGroup> group_adjacent(std::span<const CellDetection> cells) {
    std::vector<CellDetection> sorted(cells.begin(), cells.end());
    std::sort(sorted.begin(), sorted.end(), grid_order);

    std::vector<std::size_t> parent(sorted.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    for (std::size_t i = 0; i < sorted.size(); ++i)
        for (std::size_t j = i + 1; j < sorted.size() && sorted[j].row <= sorted[i].row + 1; ++j)
            if (adjacent(sorted[i], sorted[j])) unite(parent, i, j);

    // Roots are the smallest index of each component, which in grid order is its
    // smallest (row, col) member, so emitting groups by root gives the required order.
    std::vector<CellGroup> groups;
    std::vector<std::size_t> slot(sorted.size(), SIZE_MAX);
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const std::size_t root = find_root(parent, i);
        if (slot[root] == SIZE_MAX) {
            slot[root] = groups.size();
            groups.emplace_back();
        }
        groups[slot[root]].members.push_back(sorted[i]);
    }
    return groups;
}

std::vector<CellGroup> drop_singletons(std::vector<CellGroup> groups) {
    std::erase_if(groups, [](const CellGroup& g) { return g.members.size() == 1; });
    return groups;
}

LineEquation fit_points(std::span<const Point2> points, LineKind kind) {
    if (points.size() < 2) throw DegenerateError("line fit needs at least two points");
    double x_min = points.front().x, x_max = points.front().x;
    double sx = 0, sy = 0;
    for (const auto& p : points) {
        sx += p.x;
        sy += p.y;
        x_min = std::min(x_min, p.x);
        x_max = std::max(x_max, p.x);
    }
    if (x_max - x_min < 1.0)
        throw DegenerateError(fmt::format("near-vertical point set (x spread {:.3g} px)", x_max - x_min));
    const double n = static_cast<double>(points.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (const auto& p : points) {
        sxx += (p.x - mx) * (p.x - mx);
        sxy += (p.x - mx) * (p.y - my);
    }
    const double k = sxy / sxx;
    return LineEquation{kind, k, my - k * mx, x_min, x_max, 0};
}

LineEquation fit_group(const CellGroup& group, const GridGeometry& geom) {
    if (group.members.size() < 2) throw DegenerateError("cannot fit a group with fewer than two cells");
    std::vector<Point2> pts;
    pts.reserve(2 * group.members.size());
    for (const auto& m : group.members) {
        const LineSegment s = cell_to_pixels(m, geom);
        pts.push_back({s.x1, s.y1});
        pts.push_back({s.x2, s.y2});
    }
    LineEquation eq = fit_points(pts, group.members.front().kind);
    eq.source_cells = group.members.size();
    return eq;
}

bool should_merge(const LineEquation& a, const LineEquation& b, const LinkerConfig& cfg) {
    const double f_lo = (a.k - b.k) * cfg.intersect_lo + (a.b - b.b);
    const double f_hi = (a.k - b.k) * cfg.intersect_hi + (a.b - b.b);
    if (f_lo * f_hi <= 0.0) return true;
    if (std::max(std::abs(f_lo), std::abs(f_hi)) <= cfg.coincide_px) return true;

    const double left = std::hypot(a.x_min - b.x_min, a.y_at(a.x_min) - b.y_at(b.x_min));
    const double right = std::hypot(a.x_max - b.x_max, a.y_at(a.x_max) - b.y_at(b.x_max));
    return left <= cfg.endpoint_close_px || right <= cfg.endpoint_close_px;
}

std::vector<LineEquation> merge_groups(std::vector<CellGroup> groups, const LinkerConfig& cfg,
                                       const GridGeometry& geom) {
    for (auto& g : groups)
        if (!g.fitted) g.fitted = fit_group(g, geom);

    std::vector<std::size_t> parent(groups.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    for (std::size_t i = 0; i < groups.size(); ++i)
        for (std::size_t j = i + 1; j < groups.size(); ++j)
            if (should_merge(*groups[i].fitted, *groups[j].fitted, cfg)) unite(parent, i, j);

    std::vector<LineEquation> out;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (find_root(parent, i) != i) continue;
        CellGroup merged;
        std::size_t parts = 0;
        for (std::size_t j = i; j < groups.size(); ++j) {
            if (find_root(parent, j) != i) continue;
            ++parts;
            merged.members.insert(merged.members.end(), groups[j].members.begin(), groups[j].members.end());
        }
        if (parts == 1) {
            out.push_back(*groups[i].fitted);
            continue;
        }
        std::sort(merged.members.begin(), merged.members.end(), grid_order);
        out.push_back(fit_group(merged, geom));
    }
    sort_by_mean_y(out);
    return out;
}

LinkResult link_kind(const LabelPair& labels, const LinkerConfig& cfg, const GridGeometry& geom) {
    cfg.validate();
    LinkResult result;
    const auto decoded = decode_cells(labels, cfg.confidence_threshold);
    result.counts.thresholded = decoded.size();
    const auto selected = select_cells(decoded, cfg);
    result.counts.top_k = selected.size();
    auto groups = group_adjacent(selected);
    result.counts.groups = groups.size();
    groups = drop_singletons(std::move(groups));
    result.counts.kept_groups = groups.size();
    for (const auto& g : groups) result.counts.kept_cells += g.members.size();

    std::vector<CellGroup> fitted;
    for (auto& g : groups) {
        try {
            g.fitted = fit_group(g, geom);
            fitted.push_back(std::move(g));
        } catch (const DegenerateError& e) {
            result.warnings.push_back(fmt::format("{} group at cell ({}, {}) skipped: {}", to_string(labels.kind),
                                                  g.members.front().row, g.members.front().col, e.what()));
        }
    }
    result.counts.fitted = fitted.size();
    result.lines = merge_groups(std::move(fitted), cfg, geom);
    result.counts.lines = result.lines.size();
    return result;
}

LinkedLines link_lines(const EncodedLabels& labels, const LinkerConfig& cfg, const GridGeometry& geom) {
    return {link_kind(labels.convex, cfg, geom), link_kind(labels.concave, cfg, geom)};
}

std::string format_equations_csv(std::span<const LineEquation> lines) {
    std::string out = "kind,k,b,x_min,x_max,cells\n";
    for (const auto& l : lines)
        out += fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{}\n", to_string(l.kind), l.k, l.b, l.x_min, l.x_max,
                           l.source_cells);
    return out;
}

}  // namespace stairkit
