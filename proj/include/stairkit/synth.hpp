#pragma once

#include "stairkit/geometry.hpp"
#include "stairkit/label_codec.hpp"
#include "stairkit/reconstruct.hpp"
#include "stairkit/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace stairkit {

/**
 * Camera placement in the stair world frame. The world frame has X to the right,
 * Y up and Z along the ascent; the first riser stands in the plane Z = 0 and the
 * floor is Y = 0. Angles are radians: positive pitch tilts the view down, positive
 * yaw turns it toward +X, roll spins it about the optical axis.
 */
struct CameraPose {
    double pitch = 0, yaw = 0, roll = 0;
    double x = 0, y = 1.5, z = -1.0;  ///< camera centre in world metres
};

struct StairSpec {
    int steps = 3;
    double riser_h = 0.17;
    double tread_d = 0.28;
    double width = 6.0;  ///< metres, centred on X = 0
    CameraPose pose;
    CameraIntrinsics k{360, 360, 256, 256};
    std::size_t image_h = 512;
    std::size_t image_w = 512;
    double background_depth = 10.0;  ///< depth of the far wall behind everything

    void validate() const;
};

/// One planar stair face in the camera frame: points P on it satisfy normal . P = offset.
struct SurfacePlane {
    SurfaceClass cls = SurfaceClass::Tread;
    int step = 0;
    double normal[3] = {0, 0, 0};  ///< unit length
    double offset = 0;
};

struct SceneTruth {
    StairSpec spec;
    std::vector<LineSegment> lines;  ///< clipped to the image, left endpoint first
    TensorGrid seg;                  ///< H x W x 3 one-hot (u8), class order background/riser/tread
    TensorGrid depth;                ///< H x W metres, exact ray-plane depth
    TensorGrid rgb;                  ///< H x W x 3 flat shaded
    TensorGrid surface;              ///< H x W u8: 0 background, 1 + 2k riser k, 2 + 2k tread k

    std::size_t count(LineKind kind) const;
};

/// Pinhole projection onto pixel coordinates; inverse of backproject_pixel.
Point2 project_point(const Point3& p, const CameraIntrinsics& k);

/// World to camera frame for the spec's pose.
Point3 world_to_camera(const CameraPose& pose, const Point3& world);
Point3 camera_to_world(const CameraPose& pose, const Point3& cam);

/// Camera-frame planes of every riser and tread, riser k before tread k.
std::vector<SurfacePlane> surface_planes(const StairSpec& spec);

/**
 * Renders the staircase. Convex lines are tread front edges at (k d, (k+1) h);
 * concave lines are riser bottom edges at (k d, k h). Line emission does no
 * occlusion reasoning, so poses should look down on the top tread.
 */
SceneTruth generate_scene(const StairSpec& spec);

/// Centred head-on view from above the top tread, with no yaw or roll.
StairSpec default_stair_spec(int steps, std::size_t image_h = 512, std::size_t image_w = 512);

/// Random view of a `steps`-step staircase from above the top tread.
StairSpec sample_stair_spec(std::mt19937_64& rng, int steps, std::size_t image_h = 512, std::size_t image_w = 512);

struct NoiseSpec {
    double conf_jitter = 0;    ///< std-dev added to every heat value (result clamped to [0, 1])
    double loc_jitter_px = 0;  ///< std-dev in pixels added to endpoints of nonzero cells
    std::uint64_t seed = 0;
};

/// Perturbs encoded labels; deterministic for a given seed.
EncodedLabels add_noise(const EncodedLabels& labels, const NoiseSpec& noise, const GridGeometry& geom);
/// encode_lines on the scene lines followed by add_noise.
EncodedLabels noisy_labels(const SceneTruth& truth, const NoiseSpec& noise, const GridGeometry& geom);

/// `key = value` lines describing the spec.
std::string format_spec(const StairSpec& spec);

/// lines.csv, seg.stn3, depth.stn3, rgb.stn3, surface.stn3, intrinsics.txt, spec.txt
void write_scene(const SceneTruth& truth, const std::filesystem::path& dir);

}  // namespace stairkit
