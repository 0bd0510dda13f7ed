#pragma once

#include "stairkit/geometry.hpp"
#include "stairkit/tensor.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace stairkit {

struct CellIndex {
    std::size_t row = 0;
    std::size_t col = 0;
    friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

/// Decoded content of one heatmap cell. Endpoints are normalized to the cell's upper-left corner.
struct CellDetection {
    std::size_t row = 0;
    std::size_t col = 0;
    double confidence = 0;
    double x1n = 0, y1n = 0, x2n = 0, y2n = 0;
    LineKind kind = LineKind::Convex;
};

/// Heatmap (rows x cols x 1) and location grid (rows x cols x 4) for one line kind.
struct LabelPair {
    TensorGrid heatmap;
    TensorGrid locations;
    LineKind kind = LineKind::Convex;

    static LabelPair zeros(const GridGeometry& geom, LineKind kind);
    /// Checks shapes against each other, value ranges, and zero locations on zero-heat cells.
    void validate() const;
};

struct EncodedLabels {
    LabelPair convex;
    LabelPair concave;

    const LabelPair& of(LineKind kind) const { return kind == LineKind::Convex ? convex : concave; }
    LabelPair& of(LineKind kind) { return kind == LineKind::Convex ? convex : concave; }
};

/// Part of a segment lying in one half-open grid cell, as a parameter range along the segment.
struct CellTraversal {
    CellIndex cell;
    double t_begin = 0;  ///< arc length from the left endpoint
    double t_end = 0;
    LineSegment clipped;
};

/**
 * Gaussian endpoint response at a point on `line`:
 * exp(-d^2 / (2 sigma^2)) with d the distance to the nearer endpoint and sigma = |L| / 2.
 * The midpoint therefore scores exp(-1/2).
 */
double gaussian_response(double x, double y, const LineSegment& line);

/// Sampling step that bounds codec roundtrip error: min(stride) / 4.
double rasterization_step(const GridGeometry& geom);

CellIndex pixel_to_cell(double x, double y, const GridGeometry& geom);

/// Every cell the segment passes through, ordered along the segment from its left endpoint.
std::vector<CellTraversal> traverse_cells(const LineSegment& line, const GridGeometry& geom);

/**
 * Builds the heatmap/location labels for both kinds. A cell's heat is the largest
 * Gaussian response over the part of each line inside it; when lines overlap a cell
 * the line with the larger response owns the cell's locations.
 */
EncodedLabels encode_lines(std::span<const LineSegment> lines, const GridGeometry& geom);

/// Cells with heat >= threshold, by confidence descending then (row, col).
std::vector<CellDetection> decode_cells(const LabelPair& labels, double threshold);

LineSegment cell_to_pixels(const CellDetection& det, const GridGeometry& geom);

// Ground-truth lines CSV: header `kind,x1,y1,x2,y2`.
std::vector<LineSegment> parse_lines_csv(std::string_view text);
std::vector<LineSegment> read_lines_csv(const std::filesystem::path& path);
std::string format_lines_csv(std::span<const LineSegment> lines);

// `<stem>.heat.<kind>.stn3` and `<stem>.loc.<kind>.stn3`
std::filesystem::path heat_path(const std::filesystem::path& stem, LineKind kind);
std::filesystem::path loc_path(const std::filesystem::path& stem, LineKind kind);
void write_labels(const EncodedLabels& labels, const std::filesystem::path& stem);
LabelPair read_label_pair(const std::filesystem::path& heat, const std::filesystem::path& loc, LineKind kind);
EncodedLabels read_labels(const std::filesystem::path& stem);

}  // namespace stairkit
