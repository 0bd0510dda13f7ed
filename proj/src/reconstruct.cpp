#include "stairkit/reconstruct.hpp"

#include "parallel.hpp"
#include "stairkit/error.hpp"
#include "text_util.hpp"

#include <cmath>

#include <fmt/format.h>

namespace stairkit {

namespace {

struct Plane {
    std::size_t rows, cols;
};

// Depth grids are H x W or H x W x 1.
Plane depth_plane(const TensorGrid& depth) {
    depth.validate();
    if (depth.channels() != 1)
        throw DimensionError(fmt::format("depth must be H x W, got {}", dims_string(depth.dims())));
    return {depth.rows(), depth.cols()};
}

void check_mask(const TensorGrid& mask, const Plane& plane) {
    if (mask.rank() != 3 || mask.channels() != kNumClasses)
        throw DimensionError(fmt::format("mask must be H x W x 3, got {}", dims_string(mask.dims())));
    if (mask.rows() != plane.rows || mask.cols() != plane.cols)
        throw DimensionError(fmt::format("mask {} does not align with depth {}x{}", dims_string(mask.dims()),
                                         plane.rows, plane.cols));
}

void check_depth_values(const TensorGrid& depth) {
    for (float z : depth.data())
        if (!std::isfinite(z) || z < 0.0f) throw FormatError(fmt::format("invalid depth value {}", z));
}

}  // namespace

std::string_view to_string(SurfaceClass cls) {
    switch (cls) {
        case SurfaceClass::Background: return "background";
        case SurfaceClass::Riser: return "riser";
        case SurfaceClass::Tread: return "tread";
    }
    return "unknown";
}

std::optional<SurfaceClass> parse_surface_class(std::string_view text) {
    if (text == "background") return SurfaceClass::Background;
    if (text == "riser") return SurfaceClass::Riser;
    if (text == "tread") return SurfaceClass::Tread;
    return std::nullopt;
}

TensorGrid harden_mask(const TensorGrid& scores, std::size_t threads) {
    scores.validate();
    if (scores.rank() != 3 || scores.channels() != kNumClasses)
        throw DimensionError(fmt::format("harden_mask needs H x W x 3 scores, got {}", dims_string(scores.dims())));
    TensorGrid out({scores.rows(), scores.cols(), kNumClasses}, DType::U8);
    const float* in = scores.data().data();
    float* dst = out.data().data();
    const std::size_t cols = scores.cols();
    detail::for_row_bands(scores.rows(), threads, [&](std::size_t, std::size_t r0, std::size_t r1) {
        for (std::size_t i = r0 * cols; i < r1 * cols; ++i) {
            const float* px = in + 3 * i;
            std::size_t best = 0;
            if (px[1] > px[best]) best = 1;
            if (px[2] > px[best]) best = 2;
            dst[3 * i + best] = 1.0f;
        }
    });
    return out;
}

TensorGrid class_depth(const TensorGrid& depth, const TensorGrid& mask, SurfaceClass cls, std::size_t threads) {
    const Plane plane = depth_plane(depth);
    check_mask(mask, plane);
    TensorGrid out({plane.rows, plane.cols});
    const float* z = depth.data().data();
    const float* m = mask.data().data() + static_cast<std::size_t>(cls);
    float* dst = out.data().data();
    detail::for_row_bands(plane.rows, threads, [&](std::size_t, std::size_t r0, std::size_t r1) {
        for (std::size_t i = r0 * plane.cols; i < r1 * plane.cols; ++i) dst[i] = z[i] * m[3 * i];
    });
    return out;
}

Point3 backproject_pixel(double x, double y, double z, const CameraIntrinsics& k) {
    if (!(z > 0.0)) throw DegenerateError(fmt::format("cannot back-project depth {}", z));
    return {(x + 0.5 - k.cx) * z / k.fx, (y + 0.5 - k.cy) * z / k.fy, z};
}

PointCloud reconstruct_cloud(const TensorGrid& depth, const TensorGrid& mask, const CameraIntrinsics& k,
                             SurfaceClass cls, const TensorGrid* rgb, std::size_t threads) {
    if (static_cast<std::size_t>(cls) >= kNumClasses)
        throw Error(fmt::format("unknown class id {}", static_cast<int>(cls)));
    const Plane plane = depth_plane(depth);
    check_mask(mask, plane);
    check_depth_values(depth);
    if (rgb) {
        rgb->validate();
        if (rgb->rank() != 3 || rgb->channels() != 3 || rgb->rows() != plane.rows || rgb->cols() != plane.cols)
            throw DimensionError(fmt::format("rgb {} does not align with depth {}x{}", dims_string(rgb->dims()),
                                             plane.rows, plane.cols));
    }

    const std::size_t bands = detail::band_count(plane.rows, threads);
    std::vector<PointCloud> parts(bands);
    const float* z = depth.data().data();
    const float* m = mask.data().data() + static_cast<std::size_t>(cls);
    detail::for_row_bands(plane.rows, threads, [&](std::size_t band, std::size_t r0, std::size_t r1) {
        PointCloud& part = parts[band];
        for (std::size_t r = r0; r < r1; ++r) {
            for (std::size_t c = 0; c < plane.cols; ++c) {
                const std::size_t i = r * plane.cols + c;
                if (!(m[3 * i] > 0.5f)) continue;
                const double zi = z[i];
                if (zi == 0.0) {
                    ++part.dropped_pixels;
                    continue;
                }
                part.points.push_back({(static_cast<double>(c) + 0.5 - k.cx) * zi / k.fx,
                                       (static_cast<double>(r) + 0.5 - k.cy) * zi / k.fy, zi});
                part.source_pixels.push_back(static_cast<std::uint32_t>(i));
                if (rgb) {
                    const float* px = rgb->data().data() + 3 * i;
                    auto to_u8 = [](float v) {
                        return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
                    };
                    part.colors.push_back({to_u8(px[0]), to_u8(px[1]), to_u8(px[2])});
                }
            }
        }
    });

    PointCloud cloud;
    cloud.class_id = cls;
    std::size_t total = 0;
    for (const auto& p : parts) total += p.points.size();
    cloud.points.reserve(total);
    cloud.source_pixels.reserve(total);
    if (rgb) cloud.colors.reserve(total);
    for (auto& p : parts) {
        cloud.points.insert(cloud.points.end(), p.points.begin(), p.points.end());
        cloud.source_pixels.insert(cloud.source_pixels.end(), p.source_pixels.begin(), p.source_pixels.end());
        cloud.colors.insert(cloud.colors.end(), p.colors.begin(), p.colors.end());
        cloud.dropped_pixels += p.dropped_pixels;
    }
    return cloud;
}

std::size_t count_out_of_range(const TensorGrid& depth, const DepthRange& range) {
    std::size_t n = 0;
    for (float z : depth.data())
        if (z != 0.0f && (z < range.dmin || z > range.dmax)) ++n;
    return n;
}

std::string format_ply(const PointCloud& cloud) {
    std::string out = fmt::format(
        "ply\nformat ascii 1.0\ncomment class {}\nelement vertex {}\n"
        "property float x\nproperty float y\nproperty float z\n",
        to_string(cloud.class_id), cloud.points.size());
    if (cloud.has_colors()) out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out += "end_header\n";
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const auto& p = cloud.points[i];
        out += fmt::format("{} {} {}", static_cast<float>(p.x), static_cast<float>(p.y), static_cast<float>(p.z));
        if (cloud.has_colors())
            out += fmt::format(" {} {} {}", cloud.colors[i][0], cloud.colors[i][1], cloud.colors[i][2]);
        out += '\n';
    }
    return out;
}

PointCloud parse_ply(std::string_view text) {
    const auto lines = detail::split_lines(text);
    if (lines.empty() || detail::trim(lines[0]) != "ply") throw FormatError("ply: missing magic line");
    PointCloud cloud;
    std::size_t vertices = 0;
    std::size_t properties = 0;
    std::size_t i = 1;
    for (; i < lines.size(); ++i) {
        const auto line = detail::trim(lines[i]);
        if (line == "end_header") break;
        const auto f = detail::split(line, ' ');
        if (f[0] == "format" && (f.size() < 2 || f[1] != "ascii")) throw FormatError("ply: only ascii is supported");
        if (f[0] == "element" && f.size() == 3 && f[1] == "vertex")
            vertices = static_cast<std::size_t>(detail::parse_double(f[2], "ply vertex count"));
        if (f[0] == "property") ++properties;
        if (f[0] == "comment" && f.size() == 3 && f[1] == "class")
            if (auto cls = parse_surface_class(f[2])) cloud.class_id = *cls;
    }
    if (i == lines.size()) throw FormatError("ply: missing end_header");
    if (properties != 3 && properties != 6) throw FormatError("ply: expected xyz or xyz+rgb properties");
    if (lines.size() - i - 1 < vertices) throw FormatError("ply: fewer vertex lines than declared");
    for (std::size_t v = 0; v < vertices; ++v) {
        const auto f = detail::split(detail::trim(lines[i + 1 + v]), ' ');
        if (f.size() != properties) throw FormatError(fmt::format("ply: vertex {} has {} fields", v, f.size()));
        cloud.points.push_back({detail::parse_double(f[0], "x"), detail::parse_double(f[1], "y"),
                                detail::parse_double(f[2], "z")});
        if (properties == 6) {
            Rgb c{};
            for (int ch = 0; ch < 3; ++ch)
                c[ch] = static_cast<std::uint8_t>(detail::parse_double(f[3 + ch], "color"));
            cloud.colors.push_back(c);
        }
    }
    return cloud;
}

void write_ply(const PointCloud& cloud, const std::filesystem::path& path) {
    write_text_atomic(path, format_ply(cloud));
}

PointCloud read_ply(const std::filesystem::path& path) { return parse_ply(detail::read_text(path)); }

}  // namespace stairkit
