#pragma once

#include "stairkit/geometry.hpp"
#include "stairkit/label_codec.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stairkit {

/// Adjacent same-kind cells and, once fitted, their line.
struct CellGroup {
    std::vector<CellDetection> members;
    std::optional<LineEquation> fitted;
};

struct LinkerConfig {
    double confidence_threshold = 0.75;
    std::size_t top_k = 50;
    /// Two fitted lines whose crossing x falls in [intersect_lo, intersect_hi] belong together.
    double intersect_lo = 0.0;
    double intersect_hi = 512.0;
    /// Euclidean distance under which left (or right) endpoints count as close.
    double endpoint_close_px = 16.0;
    /// Lines closer than this over the whole intersect range are treated as crossing.
    double coincide_px = 1.0;

    /// Defaults scaled to `geom`: range [0, input_w], closeness 2 * stride_h.
    static LinkerConfig for_geometry(const GridGeometry& geom);
    void validate() const;
};

/// Cell / group counts after each linking stage, for inspecting the filter cascade.
struct LinkStageCounts {
    std::size_t thresholded = 0;
    std::size_t top_k = 0;
    std::size_t groups = 0;
    std::size_t kept_groups = 0;
    std::size_t kept_cells = 0;
    std::size_t fitted = 0;
    std::size_t lines = 0;
};

struct LinkResult {
    std::vector<LineEquation> lines;  ///< by mean y, top of the image first
    LinkStageCounts counts;
    std::vector<std::string> warnings;
};

struct LinkedLines {
    LinkResult convex;
    LinkResult concave;

    const LinkResult& of(LineKind kind) const { return kind == LineKind::Convex ? convex : concave; }
    /// Both kinds merged and ordered by mean y.
    std::vector<LineEquation> all() const;
};

/// Keeps cells at or above the threshold, ordered as decode_cells orders them, truncated to top_k.
std::vector<CellDetection> select_cells(std::span<const CellDetection> dets, const LinkerConfig& cfg);

/// 8-connected components over (row, col), ordered by their smallest (row, col) member.
std::vector<CellGroup> group_adjacent(std::span<const CellDetection> cells);

std::vector<CellGroup> drop_singletons(std::vector<CellGroup> groups);

/// Ordinary least squares y = kx + b. Throws DegenerateError when the x spread is under 1 px.
LineEquation fit_points(std::span<const Point2> points, LineKind kind = LineKind::Convex);

/// Fits both denormalized endpoints of every member cell.
LineEquation fit_group(const CellGroup& group, const GridGeometry& geom);

/// True when the two lines cross inside the range or their left or right endpoints are close.
bool should_merge(const LineEquation& a, const LineEquation& b, const LinkerConfig& cfg);

/**
 * Merges fitted groups into whole stair lines. Mergeability is evaluated on the
 * initial fits and closed transitively, so the result does not depend on group
 * order. Each merged group is refit once; untouched groups keep their first fit.
 */
std::vector<LineEquation> merge_groups(std::vector<CellGroup> groups, const LinkerConfig& cfg,
                                       const GridGeometry& geom);

/// Decode, select, group, drop singletons, fit and merge for one kind.
LinkResult link_kind(const LabelPair& labels, const LinkerConfig& cfg, const GridGeometry& geom);
LinkedLines link_lines(const EncodedLabels& labels, const LinkerConfig& cfg, const GridGeometry& geom);

/// `kind,k,b,x_min,x_max,cells` with six decimals.
std::string format_equations_csv(std::span<const LineEquation> lines);

}  // namespace stairkit
