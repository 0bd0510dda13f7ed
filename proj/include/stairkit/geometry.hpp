#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace stairkit {

enum class LineKind { Convex, Concave };

std::string_view to_string(LineKind kind);
/// Accepts "convex" / "concave"; returns nullopt otherwise.
std::optional<LineKind> parse_line_kind(std::string_view text);

/// Input image size and the coarse heatmap grid laid over it.
struct GridGeometry {
    std::size_t input_h = 512;
    std::size_t input_w = 512;
    std::size_t grid_rows = 64;
    std::size_t grid_cols = 32;

    double stride_h() const noexcept { return static_cast<double>(input_h) / grid_rows; }
    double stride_w() const noexcept { return static_cast<double>(input_w) / grid_cols; }
    std::size_t cells() const noexcept { return grid_rows * grid_cols; }

    /// Throws DimensionError unless the input divides evenly into the grid.
    void validate() const;
};

struct Point2 {
    double x = 0, y = 0;
};

/// One stair line in input-pixel coordinates, left endpoint first.
struct LineSegment {
    LineKind kind = LineKind::Convex;
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
    double score = 1.0;

    double length() const noexcept;
    bool degenerate() const noexcept { return length() == 0.0; }
    /// Swaps endpoints so that x1 < x2, or y1 <= y2 on a vertical tie.
    LineSegment ordered() const noexcept;
};

/// y = k x + b over [x_min, x_max].
struct LineEquation {
    LineKind kind = LineKind::Convex;
    double k = 0;
    double b = 0;
    double x_min = 0;
    double x_max = 0;
    std::size_t source_cells = 0;

    double y_at(double x) const noexcept { return k * x + b; }
    double mean_y() const noexcept { return y_at(0.5 * (x_min + x_max)); }
};

struct CameraIntrinsics {
    double fx = 1, fy = 1, cx = 0, cy = 0;
};

/// Reads nine whitespace-separated decimals (row-major K, zero skew, bottom row 0 0 1).
CameraIntrinsics parse_intrinsics(std::string_view text);
/// Inverse of parse_intrinsics; round-trips exactly.
std::string format_intrinsics(const CameraIntrinsics& k);

}  // namespace stairkit
