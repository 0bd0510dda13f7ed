#include "stairkit/label_codec.hpp"

#include "stairkit/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace stairkit {

namespace {

struct Breakpoint {
    double t, x, y;
};

void check_segment(const LineSegment& line, const GridGeometry& geom) {
    const double w = static_cast<double>(geom.input_w);
    const double h = static_cast<double>(geom.input_h);
    auto inside = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && x >= 0 && x < w && y >= 0 && y < h;
    };
    if (!inside(line.x1, line.y1) || !inside(line.x2, line.y2))
        throw BoundsError(fmt::format("{} segment ({}, {})-({}, {}) leaves the {}x{} image",
                                      to_string(line.kind), line.x1, line.y1, line.x2, line.y2,
                                      geom.input_w, geom.input_h));
    if (line.degenerate())
        throw DegenerateError(fmt::format("{} segment at ({}, {}) has zero length", to_string(line.kind),
                                          line.x1, line.y1));
}

CellIndex floor_cell(double x, double y, const GridGeometry& geom) {
    auto row = static_cast<std::size_t>(std::max(0.0, std::floor(y / geom.stride_h())));
    auto col = static_cast<std::size_t>(std::max(0.0, std::floor(x / geom.stride_w())));
    return {std::min(row, geom.grid_rows - 1), std::min(col, geom.grid_cols - 1)};
}

// Grid-line crossings strictly inside (lo, hi) along one axis.
void add_crossings(std::vector<Breakpoint>& out, double a, double b, double stride, double len,
                   const LineSegment& s, bool x_axis) {
    if (a == b) return;
    const double lo = std::min(a, b), hi = std::max(a, b);
    for (double m = std::floor(lo / stride) + 1; m * stride < hi; m += 1) {
        const double boundary = m * stride;
        const double frac = (boundary - a) / (b - a);
        if (frac <= 0 || frac >= 1) continue;
        if (x_axis)
            out.push_back({frac * len, boundary, s.y1 + frac * (s.y2 - s.y1)});
        else
            out.push_back({frac * len, s.x1 + frac * (s.x2 - s.x1), boundary});
    }
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

LabelPair LabelPair::zeros(const GridGeometry& geom, LineKind kind) {
    return {TensorGrid::zeros(geom.grid_rows, geom.grid_cols, 1),
            TensorGrid::zeros(geom.grid_rows, geom.grid_cols, 4), kind};
}

void LabelPair::validate() const {
    heatmap.validate();
    locations.validate();
    if (heatmap.channels() != 1 || locations.rank() != 3 || locations.channels() != 4 ||
        heatmap.rows() != locations.rows() || heatmap.cols() != locations.cols())
        throw DimensionError(fmt::format("label pair shapes disagree: heat {} vs loc {}",
                                         dims_string(heatmap.dims()), dims_string(locations.dims())));
    for (float v : heatmap.data())
        if (!(v >= 0.0f && v <= 1.0f)) throw FormatError(fmt::format("heat value {} outside [0, 1]", v));
    for (float v : locations.data())
        if (!(v >= 0.0f && v <= 1.0f)) throw FormatError(fmt::format("location value {} outside [0, 1]", v));
}

double gaussian_response(double x, double y, const LineSegment& line) {
    const double len = line.length();
    if (len == 0.0) throw DegenerateError("gaussian_response: zero-length line");
    const double d1 = (x - line.x1) * (x - line.x1) + (y - line.y1) * (y - line.y1);
    const double d2 = (x - line.x2) * (x - line.x2) + (y - line.y2) * (y - line.y2);
    const double sigma = 0.5 * len;
    return std::exp(-std::min(d1, d2) / (2.0 * sigma * sigma));
}

double rasterization_step(const GridGeometry& geom) {
    return std::min(geom.stride_w(), geom.stride_h()) / 4.0;
}

CellIndex pixel_to_cell(double x, double y, const GridGeometry& geom) {
    if (!(x >= 0 && x < static_cast<double>(geom.input_w) && y >= 0 &&
          y < static_cast<double>(geom.input_h)))
        throw BoundsError(fmt::format("pixel ({}, {}) outside the {}x{} image", x, y, geom.input_w,
                                      geom.input_h));
    return {static_cast<std::size_t>(std::floor(y / geom.stride_h())),
            static_cast<std::size_t>(std::floor(x / geom.stride_w()))};
}

std::vector<CellTraversal> traverse_cells(const LineSegment& input, const GridGeometry& geom) {
    geom.validate();
    check_segment(input, geom);
    const LineSegment s = input.ordered();
    const double len = s.length();

    std::vector<Breakpoint> breaks{{0.0, s.x1, s.y1}, {len, s.x2, s.y2}};
    add_crossings(breaks, s.x1, s.x2, geom.stride_w(), len, s, true);
    add_crossings(breaks, s.y1, s.y2, geom.stride_h(), len, s, false);
    std::sort(breaks.begin(), breaks.end(), [](const Breakpoint& a, const Breakpoint& b) { return a.t < b.t; });

    std::vector<CellTraversal> out;
    auto extend = [&](CellIndex cell, const Breakpoint& a, const Breakpoint& b) {
        auto it = std::find_if(out.begin(), out.end(), [&](const CellTraversal& c) { return c.cell == cell; });
        if (it == out.end()) {
            CellTraversal tr;
            tr.cell = cell;
            tr.t_begin = a.t;
            tr.t_end = b.t;
            tr.clipped = {s.kind, a.x, a.y, b.x, b.y, 1.0};
            out.push_back(tr);
            return;
        }
        if (a.t < it->t_begin) {
            it->t_begin = a.t;
            it->clipped.x1 = a.x;
            it->clipped.y1 = a.y;
        }
        if (b.t > it->t_end) {
            it->t_end = b.t;
            it->clipped.x2 = b.x;
            it->clipped.y2 = b.y;
        }
    };

    extend(floor_cell(s.x1, s.y1, geom), breaks.front(), breaks.front());
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const Breakpoint& a = breaks[i];
        const Breakpoint& b = breaks[i + 1];
        if (!(b.t > a.t)) continue;
        extend(floor_cell(0.5 * (a.x + b.x), 0.5 * (a.y + b.y), geom), a, b);
    }
    extend(floor_cell(s.x2, s.y2, geom), breaks.back(), breaks.back());

    for (auto& tr : out) tr.clipped = tr.clipped.ordered();
    std::stable_sort(out.begin(), out.end(),
                     [](const CellTraversal& a, const CellTraversal& b) { return a.t_begin < b.t_begin; });
    return out;
}

EncodedLabels encode_lines(std::span<const LineSegment> lines, const GridGeometry& geom) {
    geom.validate();
    EncodedLabels labels{LabelPair::zeros(geom, LineKind::Convex), LabelPair::zeros(geom, LineKind::Concave)};
    const double sw = geom.stride_w(), sh = geom.stride_h();

    for (const LineSegment& line : lines) {
        const auto cells = traverse_cells(line, geom);
        const double len = line.length();
        const double sigma = 0.5 * len;
        LabelPair& pair = labels.of(line.kind);
        for (const CellTraversal& tr : cells) {
            // The response is monotone in distance to the nearer endpoint, so the
            // cell maximum sits at whichever end of the clipped part is closer to one.
            const double d = std::min(tr.t_begin, len - tr.t_end);
            const double value = std::exp(-(d * d) / (2.0 * sigma * sigma));
            float& heat = pair.heatmap.at(tr.cell.row, tr.cell.col);
            if (static_cast<float>(value) <= heat) continue;
            heat = static_cast<float>(value);
            const double ox = static_cast<double>(tr.cell.col) * sw;
            const double oy = static_cast<double>(tr.cell.row) * sh;
            const auto r = tr.cell.row, c = tr.cell.col;
            pair.locations.at(r, c, 0) = static_cast<float>(clamp01((tr.clipped.x1 - ox) / sw));
            pair.locations.at(r, c, 1) = static_cast<float>(clamp01((tr.clipped.y1 - oy) / sh));
            pair.locations.at(r, c, 2) = static_cast<float>(clamp01((tr.clipped.x2 - ox) / sw));
            pair.locations.at(r, c, 3) = static_cast<float>(clamp01((tr.clipped.y2 - oy) / sh));
        }
    }
    return labels;
}

std::vector<CellDetection> decode_cells(const LabelPair& labels, double threshold) {
    labels.validate();
    std::vector<CellDetection> out;
    for (std::size_t r = 0; r < labels.heatmap.rows(); ++r) {
        for (std::size_t c = 0; c < labels.heatmap.cols(); ++c) {
            const double conf = labels.heatmap.at(r, c);
            if (conf < threshold) continue;
            out.push_back({r, c, conf, labels.locations.at(r, c, 0), labels.locations.at(r, c, 1),
                           labels.locations.at(r, c, 2), labels.locations.at(r, c, 3), labels.kind});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const CellDetection& a, const CellDetection& b) {
        return a.confidence > b.confidence;
    });
    return out;
}

LineSegment cell_to_pixels(const CellDetection& det, const GridGeometry& geom) {
    const double sw = geom.stride_w(), sh = geom.stride_h();
    const double col = static_cast<double>(det.col), row = static_cast<double>(det.row);
    return LineSegment{det.kind,           (col + det.x1n) * sw, (row + det.y1n) * sh,
                       (col + det.x2n) * sw, (row + det.y2n) * sh, det.confidence};
}

std::vector<LineSegment> parse_lines_csv(std::string_view text) {
    const auto rows = detail::split_lines(text);
    if (rows.empty() || detail::trim(rows.front()) != "kind,x1,y1,x2,y2")
        throw FormatError("lines csv: header must be 'kind,x1,y1,x2,y2'");
    std::vector<LineSegment> lines;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto row = detail::trim(rows[i]);
        if (row.empty()) continue;
        const auto fields = detail::split(row, ',');
        if (fields.size() != 5) throw FormatError(fmt::format("lines csv line {}: expected 5 fields", i + 1));
        const auto kind = parse_line_kind(detail::trim(fields[0]));
        if (!kind) throw FormatError(fmt::format("lines csv line {}: unknown kind '{}'", i + 1, fields[0]));
        LineSegment s;
        s.kind = *kind;
        s.x1 = detail::parse_double(fields[1], "x1");
        s.y1 = detail::parse_double(fields[2], "y1");
        s.x2 = detail::parse_double(fields[3], "x2");
        s.y2 = detail::parse_double(fields[4], "y2");
        lines.push_back(s.ordered());
    }
    return lines;
}

std::vector<LineSegment> read_lines_csv(const std::filesystem::path& path) {
    return parse_lines_csv(detail::read_text(path));
}

std::string format_lines_csv(std::span<const LineSegment> lines) {
    std::string out = "kind,x1,y1,x2,y2\n";
    for (const auto& s : lines)
        out += fmt::format("{},{},{},{},{}\n", to_string(s.kind), s.x1, s.y1, s.x2, s.y2);
    return out;
}

std::filesystem::path heat_path(const std::filesystem::path& stem, LineKind kind) {
    auto p = stem;
    p += fmt::format(".heat.{}.stn3", to_string(kind));
    return p;
}

std::filesystem::path loc_path(const std::filesystem::path& stem, LineKind kind) {
    auto p = stem;
    p += fmt::format(".loc.{}.stn3", to_string(kind));
    return p;
}

void write_labels(const EncodedLabels& labels, const std::filesystem::path& stem) {
    for (LineKind kind : {LineKind::Convex, LineKind::Concave}) {
        write_tensor(labels.of(kind).heatmap, heat_path(stem, kind));
        write_tensor(labels.of(kind).locations, loc_path(stem, kind));
    }
}

LabelPair read_label_pair(const std::filesystem::path& heat, const std::filesystem::path& loc, LineKind kind) {
    LabelPair pair{read_tensor(heat), read_tensor(loc), kind};
    if (pair.heatmap.rank() == 2)
        pair.heatmap = TensorGrid({pair.heatmap.rows(), pair.heatmap.cols(), 1}, pair.heatmap.dtype(),
                                  {pair.heatmap.data().begin(), pair.heatmap.data().end()});
    pair.validate();
    return pair;
}

EncodedLabels read_labels(const std::filesystem::path& stem) {
    return {read_label_pair(heat_path(stem, LineKind::Convex), loc_path(stem, LineKind::Convex), LineKind::Convex),
            read_label_pair(heat_path(stem, LineKind::Concave), loc_path(stem, LineKind::Concave),
                            LineKind::Concave)};
}

}  // namespace stairkit
