#include "stairkit/synth.hpp"

#include "stairkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Geometry>
#include <fmt/format.h>

namespace stairkit {

namespace {

using Eigen::Matrix3d;
using Eigen::Vector3d;

constexpr double kNearPlane = 1e-3;

// Columns are the camera axes (x right, y down, z forward) expressed in the world frame.
Matrix3d world_from_camera(const CameraPose& pose) {
    const Matrix3d flip = Vector3d(1, -1, 1).asDiagonal();
    const Matrix3d rot = (Eigen::AngleAxisd(pose.yaw, Vector3d::UnitY()) *
                          Eigen::AngleAxisd(pose.pitch, Vector3d::UnitX()) *
                          Eigen::AngleAxisd(pose.roll, Vector3d::UnitZ()))
                             .toRotationMatrix();
    return rot * flip;
}

Vector3d to_eigen(const Point3& p) { return {p.x, p.y, p.z}; }
Point3 from_eigen(const Vector3d& v) { return {v.x(), v.y(), v.z()}; }

struct WorldFace {
    SurfaceClass cls;
    int step;
    int axis;       // world axis the face is perpendicular to (1 = Y tread, 2 = Z riser)
    double level;   // coordinate along that axis
    double lo[3];   // bounds of the face
    double hi[3];
};

std::vector<WorldFace> world_faces(const StairSpec& s) {
    std::vector<WorldFace> faces;
    const double hw = 0.5 * s.width;
    for (int k = 0; k < s.steps; ++k) {
        const double z0 = k * s.tread_d, z1 = (k + 1) * s.tread_d;
        const double y0 = k * s.riser_h, y1 = (k + 1) * s.riser_h;
        faces.push_back({SurfaceClass::Riser, k, 2, z0, {-hw, y0, z0}, {hw, y1, z0}});
        faces.push_back({SurfaceClass::Tread, k, 1, y1, {-hw, y1, z0}, {hw, y1, z1}});
    }
    return faces;
}

// Clips the parametric segment a + t (b - a), t in [t0, t1], to lo <= coord <= hi.
bool clip_axis(double a, double b, double lo, double hi, double& t0, double& t1) {
    const double d = b - a;
    if (d == 0.0) return a >= lo && a <= hi;
    double ta = (lo - a) / d, tb = (hi - a) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    return t0 <= t1;
}

std::optional<LineSegment> project_edge(const StairSpec& spec, LineKind kind, const Point3& wa, const Point3& wb) {
    Point3 a = world_to_camera(spec.pose, wa);
    Point3 b = world_to_camera(spec.pose, wb);
    if (a.z < kNearPlane && b.z < kNearPlane) return std::nullopt;
    if (a.z < kNearPlane || b.z < kNearPlane) {
        const double t = (kNearPlane - a.z) / (b.z - a.z);
        const Point3 cut{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), kNearPlane};
        (a.z < kNearPlane ? a : b) = cut;
    }
    const Point2 pa = project_point(a, spec.k);
    const Point2 pb = project_point(b, spec.k);
    // Keep endpoints strictly inside the half-open image.
    const double xmax = std::nextafter(static_cast<double>(spec.image_w), 0.0) - 1e-6;
    const double ymax = std::nextafter(static_cast<double>(spec.image_h), 0.0) - 1e-6;
    double t0 = 0, t1 = 1;
    if (!clip_axis(pa.x, pb.x, 0.0, xmax, t0, t1) || !clip_axis(pa.y, pb.y, 0.0, ymax, t0, t1)) return std::nullopt;
    // Clamp away the rounding left by the parametric clip.
    auto cx = [&](double t) { return std::clamp(pa.x + t * (pb.x - pa.x), 0.0, xmax); };
    auto cy = [&](double t) { return std::clamp(pa.y + t * (pb.y - pa.y), 0.0, ymax); };
    LineSegment s{kind, cx(t0), cy(t0), cx(t1), cy(t1), 1.0};
    if (s.length() < 1.0) return std::nullopt;
    return s.ordered();
}

Rgb shade(SurfaceClass cls, int step) {
    const auto v = static_cast<std::uint8_t>(40 + (step * 23) % 160);
    switch (cls) {
        case SurfaceClass::Riser: return {220, v, 40};
        case SurfaceClass::Tread: return {40, v, 220};
        default: return {96, 96, 96};
    }
}

}  // namespace

void StairSpec::validate() const {
    if (steps < 1) throw Error("stair spec: steps must be >= 1");
    if (steps > 126) throw Error("stair spec: at most 126 steps fit the surface id grid");
    if (!(riser_h > 0 && tread_d > 0 && width > 0)) throw Error("stair spec: riser, tread and width must be positive");
    if (!(k.fx > 0 && k.fy > 0)) throw Error("stair spec: focal lengths must be positive");
    if (image_h == 0 || image_w == 0) throw Error("stair spec: image size must be positive");
    if (!(background_depth > 0)) throw Error("stair spec: background depth must be positive");
}

std::size_t SceneTruth::count(LineKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(lines.begin(), lines.end(), [&](const LineSegment& s) { return s.kind == kind; }));
}

Point2 project_point(const Point3& p, const CameraIntrinsics& k) {
    if (!(p.z > 0.0)) throw DegenerateError(fmt::format("point ({}, {}, {}) is behind the camera", p.x, p.y, p.z));
    return {k.fx * p.x / p.z + k.cx - 0.5, k.fy * p.y / p.z + k.cy - 0.5};
}

Point3 world_to_camera(const CameraPose& pose, const Point3& world) {
    const Vector3d c(pose.x, pose.y, pose.z);
    return from_eigen(world_from_camera(pose).transpose() * (to_eigen(world) - c));
}

Point3 camera_to_world(const CameraPose& pose, const Point3& cam) {
    return from_eigen(world_from_camera(pose) * to_eigen(cam) + Vector3d(pose.x, pose.y, pose.z));
}

std::vector<SurfacePlane> surface_planes(const StairSpec& spec) {
    const Matrix3d m = world_from_camera(spec.pose);
    const Vector3d c(spec.pose.x, spec.pose.y, spec.pose.z);
    std::vector<SurfacePlane> planes;
    for (const WorldFace& f : world_faces(spec)) {
        // Risers face the approaching viewer (-Z); treads face up (+Y).
        const Vector3d nw = f.axis == 2 ? Vector3d(0, 0, -1) : Vector3d(0, 1, 0);
        const double ow = f.axis == 2 ? -f.level : f.level;
        const Vector3d nc = m.transpose() * nw;
        SurfacePlane p;
        p.cls = f.cls;
        p.step = f.step;
        p.normal[0] = nc.x();
        p.normal[1] = nc.y();
        p.normal[2] = nc.z();
        p.offset = ow - nw.dot(c);
        planes.push_back(p);
    }
    return planes;
}

SceneTruth generate_scene(const StairSpec& spec) {
    spec.validate();
    const auto faces = world_faces(spec);

    bool any_in_front = false;
    for (const WorldFace& f : faces)
        for (int corner = 0; corner < 8 && !any_in_front; ++corner) {
            const Point3 w{(corner & 1) ? f.hi[0] : f.lo[0], (corner & 2) ? f.hi[1] : f.lo[1],
                           (corner & 4) ? f.hi[2] : f.lo[2]};
            any_in_front = world_to_camera(spec.pose, w).z > 0;
        }
    if (!any_in_front) throw DegenerateError("staircase lies entirely behind the camera");

    const std::size_t h = spec.image_h, w = spec.image_w;
    SceneTruth truth;
    truth.spec = spec;
    truth.seg = TensorGrid({h, w, kNumClasses}, DType::U8);
    truth.depth = TensorGrid({h, w});
    truth.rgb = TensorGrid({h, w, 3}, DType::U8);
    truth.surface = TensorGrid({h, w}, DType::U8);

    const Matrix3d m = world_from_camera(spec.pose);
    const Vector3d c(spec.pose.x, spec.pose.y, spec.pose.z);
    const auto& k = spec.k;
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t col = 0; col < w; ++col) {
            const Vector3d dc((static_cast<double>(col) + 0.5 - k.cx) / k.fx,
                              (static_cast<double>(r) + 0.5 - k.cy) / k.fy, 1.0);
            const Vector3d dw = m * dc;
            // With a unit-z camera ray the ray parameter is the camera-frame depth.
            double best = spec.background_depth;
            int hit = -1;
            for (std::size_t i = 0; i < faces.size(); ++i) {
                const WorldFace& f = faces[i];
                if (dw[f.axis] == 0.0) continue;
                const double t = (f.level - c[f.axis]) / dw[f.axis];
                if (!(t > 0.0) || t >= best) continue;
                const Vector3d p = c + t * dw;
                bool inside = true;
                for (int a = 0; a < 3 && inside; ++a)
                    if (a != f.axis) inside = p[a] >= f.lo[a] && p[a] <= f.hi[a];
                if (!inside) continue;
                best = t;
                hit = static_cast<int>(i);
            }
            const SurfaceClass cls = hit < 0 ? SurfaceClass::Background : faces[hit].cls;
            const Rgb color = shade(cls, hit < 0 ? 0 : faces[hit].step);
            truth.depth.at(r, col) = static_cast<float>(best);
            truth.seg.at(r, col, static_cast<std::size_t>(cls)) = 1.0f;
            truth.surface.at(r, col) = static_cast<float>(hit + 1);
            for (int ch = 0; ch < 3; ++ch) truth.rgb.at(r, col, ch) = color[ch];
        }
    }

    const double hw = 0.5 * spec.width;
    for (int s = 0; s < spec.steps; ++s) {
        const double z = s * spec.tread_d;
        if (auto seg = project_edge(spec, LineKind::Convex, {-hw, (s + 1) * spec.riser_h, z},
                                    {hw, (s + 1) * spec.riser_h, z}))
            truth.lines.push_back(*seg);
        if (auto seg = project_edge(spec, LineKind::Concave, {-hw, s * spec.riser_h, z}, {hw, s * spec.riser_h, z}))
            truth.lines.push_back(*seg);
    }
    return truth;
}

namespace {

double aim_pitch(const StairSpec& s) {
    const double top = s.steps * s.riser_h;
    const Vector3d target(0.0, 0.5 * top, 0.5 * s.steps * s.tread_d);
    const Vector3d v = target - Vector3d(s.pose.x, s.pose.y, s.pose.z);
    return std::atan2(-v.y(), std::hypot(v.x(), v.z()));
}

}  // namespace

StairSpec default_stair_spec(int steps, std::size_t image_h, std::size_t image_w) {
    StairSpec s;
    s.steps = steps;
    s.width = 10.0;
    s.image_h = image_h;
    s.image_w = image_w;
    const double f = 0.67 * static_cast<double>(image_w);
    s.k = {f, f, 0.5 * static_cast<double>(image_w), 0.5 * static_cast<double>(image_h)};
    s.pose.y = steps * s.riser_h + 1.1;
    s.pose.z = -0.9;
    s.pose.pitch = aim_pitch(s);
    return s;
}

StairSpec sample_stair_spec(std::mt19937_64& rng, int steps, std::size_t image_h, std::size_t image_w) {
    auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    constexpr double deg = 3.14159265358979323846 / 180.0;
    StairSpec s;
    s.steps = steps;
    s.riser_h = uniform(0.15, 0.19);
    s.tread_d = uniform(0.26, 0.32);
    s.width = uniform(8.0, 12.0);
    s.image_h = image_h;
    s.image_w = image_w;
    const double f = uniform(0.62, 0.72) * static_cast<double>(image_w);
    s.k = {f, f, 0.5 * static_cast<double>(image_w), 0.5 * static_cast<double>(image_h)};

    const double top = steps * s.riser_h;
    s.pose.x = uniform(-0.3, 0.3);
    s.pose.y = top + uniform(0.8, 1.4);
    s.pose.z = -uniform(0.6, 1.2);
    // Aim at the middle of the flight, then perturb.
    s.pose.pitch = aim_pitch(s) + uniform(-3.0, 3.0) * deg;
    s.pose.yaw = uniform(-4.0, 4.0) * deg;
    s.pose.roll = uniform(-4.0, 4.0) * deg;
    return s;
}

EncodedLabels add_noise(const EncodedLabels& labels, const NoiseSpec& noise, const GridGeometry& geom) {
    if (noise.conf_jitter < 0 || noise.loc_jitter_px < 0) throw Error("noise std-devs must be non-negative");
    EncodedLabels out = labels;
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    const double sw = geom.stride_w(), sh = geom.stride_h();
    for (LineKind kind : {LineKind::Convex, LineKind::Concave}) {
        LabelPair& pair = out.of(kind);
        const LabelPair& src = labels.of(kind);
        for (std::size_t r = 0; r < pair.heatmap.rows(); ++r) {
            for (std::size_t c = 0; c < pair.heatmap.cols(); ++c) {
                const double heat = src.heatmap.at(r, c);
                if (noise.conf_jitter > 0)
                    pair.heatmap.at(r, c) =
                        static_cast<float>(std::clamp(heat + noise.conf_jitter * unit(rng), 0.0, 1.0));
                if (noise.loc_jitter_px > 0 && heat > 0) {
                    for (std::size_t ch = 0; ch < 4; ++ch) {
                        const double scale = ch % 2 == 0 ? sw : sh;
                        const double v = src.locations.at(r, c, ch) + noise.loc_jitter_px * unit(rng) / scale;
                        pair.locations.at(r, c, ch) = static_cast<float>(std::clamp(v, 0.0, 1.0));
                    }
                }
            }
        }
    }
    return out;
}

EncodedLabels noisy_labels(const SceneTruth& truth, const NoiseSpec& noise, const GridGeometry& geom) {
    return add_noise(encode_lines(truth.lines, geom), noise, geom);
}

std::string format_spec(const StairSpec& s) {
    return fmt::format(
        "steps = {}\nriser_h = {}\ntread_d = {}\nwidth = {}\n"
        "pitch = {}\nyaw = {}\nroll = {}\ncam_x = {}\ncam_y = {}\ncam_z = {}\n"
        "fx = {}\nfy = {}\ncx = {}\ncy = {}\nimage_h = {}\nimage_w = {}\nbackground_depth = {}\n",
        s.steps, s.riser_h, s.tread_d, s.width, s.pose.pitch, s.pose.yaw, s.pose.roll, s.pose.x, s.pose.y,
        s.pose.z, s.k.fx, s.k.fy, s.k.cx, s.k.cy, s.image_h, s.image_w, s.background_depth);
}

void write_scene(const SceneTruth& truth, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_text_atomic(dir / "lines.csv", format_lines_csv(truth.lines));
    write_tensor(truth.seg, dir / "seg.stn3");
    write_tensor(truth.depth, dir / "depth.stn3");
    write_tensor(truth.rgb, dir / "rgb.stn3");
    write_tensor(truth.surface, dir / "surface.stn3");
    write_text_atomic(dir / "intrinsics.txt", format_intrinsics(truth.spec.k));
    write_text_atomic(dir / "spec.txt", format_spec(truth.spec));
}

}  // namespace stairkit
