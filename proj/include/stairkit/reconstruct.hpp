#pragma once

#include "stairkit/geometry.hpp"
#include "stairkit/tensor.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stairkit {

/// Segmentation channel order: background, riser, tread.
enum class SurfaceClass : std::uint8_t { Background = 0, Riser = 1, Tread = 2 };
inline constexpr std::size_t kNumClasses = 3;

std::string_view to_string(SurfaceClass cls);
std::optional<SurfaceClass> parse_surface_class(std::string_view text);

struct Point3 {
    double x = 0, y = 0, z = 0;
    friend bool operator==(const Point3&, const Point3&) = default;
};

using Rgb = std::array<std::uint8_t, 3>;

/// Camera-frame points of one surface class. Pixels with zero depth are not emitted.
struct PointCloud {
    SurfaceClass class_id = SurfaceClass::Tread;
    std::vector<Point3> points;
    std::vector<Rgb> colors;                   ///< empty, or one per point
    std::vector<std::uint32_t> source_pixels;  ///< row-major pixel index of each point
    std::size_t dropped_pixels = 0;            ///< class pixels skipped for zero depth

    bool has_colors() const noexcept { return !colors.empty(); }
    std::size_t size() const noexcept { return points.size(); }
};

/// Validation-only depth interval; values outside it are reported, never clamped.
struct DepthRange {
    double dmin = 0.2;
    double dmax = 10.0;
};

/// Per-pixel argmax over the 3 class scores; ties go to the lowest channel. Returns a u8 one-hot grid.
TensorGrid harden_mask(const TensorGrid& scores, std::size_t threads = 1);

/// depth * (mask plane of `cls`), elementwise.
TensorGrid class_depth(const TensorGrid& depth, const TensorGrid& mask, SurfaceClass cls, std::size_t threads = 1);

/// Inverse pinhole projection through the pixel centre. Throws DegenerateError for z <= 0.
Point3 backproject_pixel(double x, double y, double z, const CameraIntrinsics& k);

/**
 * Back-projects every pixel whose hardened mask selects `cls` and whose depth is
 * nonzero. Points are emitted in row-major order for any thread count. `rgb`, when
 * given, must be H x W x 3 aligned with the depth.
 */
PointCloud reconstruct_cloud(const TensorGrid& depth, const TensorGrid& mask, const CameraIntrinsics& k,
                             SurfaceClass cls, const TensorGrid* rgb = nullptr, std::size_t threads = 1);

/// Number of nonzero depths outside `range`.
std::size_t count_out_of_range(const TensorGrid& depth, const DepthRange& range);

std::string format_ply(const PointCloud& cloud);
PointCloud parse_ply(std::string_view text);
void write_ply(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud read_ply(const std::filesystem::path& path);

}  // namespace stairkit
