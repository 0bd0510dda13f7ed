#include "oracles.hpp"

#include "stairkit/error.hpp"
#include "stairkit/reconstruct.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

namespace stairkit {
namespace {

const CameraIntrinsics kK{500, 500, 320, 240};

TensorGrid scores_of(std::initializer_list<float> px) { return TensorGrid({1, 1, 3}, DType::F32, px); }

TensorGrid random_scores(std::mt19937& rng, std::size_t h, std::size_t w, bool ties) {
    TensorGrid s({h, w, 3});
    std::uniform_int_distribution<int> level(0, 3);
    std::uniform_real_distribution<float> u(0, 1);
    for (float& v : s.data()) v = ties ? static_cast<float>(level(rng)) / 3.0f : u(rng);
    return s;
}

TensorGrid random_depth(std::mt19937& rng, std::size_t h, std::size_t w, double zero_fraction) {
    TensorGrid d({h, w});
    std::uniform_real_distribution<float> z(0.2f, 10.0f);
    std::bernoulli_distribution zero(zero_fraction);
    for (float& v : d.data()) v = zero(rng) ? 0.0f : z(rng);
    return d;
}

void expect_identical(const PointCloud& a, const PointCloud& b) {
    ASSERT_EQ(a.points.size(), b.points.size());
    EXPECT_EQ(a.dropped_pixels, b.dropped_pixels);
    EXPECT_EQ(a.source_pixels, b.source_pixels);
    for (std::size_t i = 0; i < a.points.size(); ++i) ASSERT_EQ(a.points[i], b.points[i]) << "point " << i;
}

TEST(Harden, ArgmaxAndTies) {
    auto m = harden_mask(scores_of({0.2f, 0.5f, 0.3f}));
    EXPECT_EQ(m.at(0, 0, 0), 0);
    EXPECT_EQ(m.at(0, 0, 1), 1);
    EXPECT_EQ(m.at(0, 0, 2), 0);
    m = harden_mask(scores_of({0.5f, 0.5f, 0.0f}));
    EXPECT_EQ(m.at(0, 0, 0), 1);
    EXPECT_EQ(m.at(0, 0, 1), 0);
    m = harden_mask(scores_of({0.1f, 0.4f, 0.4f}));
    EXPECT_EQ(m.at(0, 0, 1), 1);
    EXPECT_EQ(m.dtype(), DType::U8);
}

TEST(Harden, IdempotentAndOneHot) {
    std::mt19937 rng(1);
    const auto once = harden_mask(random_scores(rng, 17, 23, true), 3);
    EXPECT_EQ(harden_mask(once), once);
    for (std::size_t r = 0; r < 17; ++r)
        for (std::size_t c = 0; c < 23; ++c) EXPECT_EQ(once.at(r, c, 0) + once.at(r, c, 1) + once.at(r, c, 2), 1.0f);
    EXPECT_THROW(harden_mask(TensorGrid({2, 2, 2})), DimensionError);
}

TEST(ClassDepth, Examples) {
    TensorGrid depth({4, 4});
    for (float& v : depth.data()) v = 2.0f;
    TensorGrid all({4, 4, 3}, DType::U8), checker({4, 4, 3}, DType::U8);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) {
            all.at(r, c, 2) = 1;
            checker.at(r, c, (r + c) % 2 ? 2 : 0) = 1;
        }
    EXPECT_EQ(class_depth(depth, all, SurfaceClass::Tread), depth);
    const auto none = class_depth(depth, all, SurfaceClass::Riser);
    for (float v : none.data()) EXPECT_EQ(v, 0.0f);
    const auto out = class_depth(depth, checker, SurfaceClass::Tread, 2);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(out.at(r, c), (r + c) % 2 ? 2.0f : 0.0f);
}

TEST(ClassDepth, ClassesPartitionTheDepth) {
    std::mt19937 rng(2);
    const auto depth = random_depth(rng, 31, 19, 0.1);
    const auto mask = harden_mask(random_scores(rng, 31, 19, false));
    const auto b = class_depth(depth, mask, SurfaceClass::Background);
    const auto r = class_depth(depth, mask, SurfaceClass::Riser);
    const auto t = class_depth(depth, mask, SurfaceClass::Tread);
    for (std::size_t i = 0; i < depth.size(); ++i)
        EXPECT_EQ(b.data()[i] + r.data()[i] + t.data()[i], depth.data()[i]);
}

TEST(Backproject, Examples) {
    auto p = backproject_pixel(319.5, 239.5, 2, kK);
    EXPECT_DOUBLE_EQ(p.x, 0);
    EXPECT_DOUBLE_EQ(p.y, 0);
    EXPECT_DOUBLE_EQ(p.z, 2);
    p = backproject_pixel(419.5, 239.5, 2, kK);
    EXPECT_NEAR(p.x, 0.4, 1e-15);
    EXPECT_NEAR(p.y, 0.0, 1e-15);
    p = backproject_pixel(0, 0, 1, CameraIntrinsics{1, 1, 0, 0});
    EXPECT_DOUBLE_EQ(p.x, 0.5);
    EXPECT_DOUBLE_EQ(p.y, 0.5);
    EXPECT_DOUBLE_EQ(p.z, 1);
    EXPECT_THROW(backproject_pixel(1, 1, 0, kK), DegenerateError);
    EXPECT_THROW(backproject_pixel(1, 1, -1, kK), DegenerateError);
}

TEST(Cloud, FullFrameConstantDepth) {
    TensorGrid depth({480, 640}), mask({480, 640, 3}, DType::U8);
    for (float& v : depth.data()) v = 2.0f;
    for (std::size_t i = 0; i < 480 * 640; ++i) mask.data()[3 * i + 2] = 1;
    const auto cloud = reconstruct_cloud(depth, mask, kK, SurfaceClass::Tread, nullptr, 4);
    ASSERT_EQ(cloud.size(), 307200u);
    double lo = 1e9, hi = -1e9;
    for (const auto& p : cloud.points) {
        EXPECT_EQ(p.z, 2.0);
        lo = std::min(lo, p.x);
        hi = std::max(hi, p.x);
    }
    EXPECT_NEAR(lo, (0.5 - 320) / 500 * 2, 1e-12);
    EXPECT_NEAR(hi, (639.5 - 320) / 500 * 2, 1e-12);
    EXPECT_NEAR(lo, -1.278, 1e-3);
    EXPECT_NEAR(hi, 1.278, 1e-3);
}

TEST(Cloud, ZeroDepthGivesEmptyCloud) {
    TensorGrid depth({8, 8}), mask({8, 8, 3}, DType::U8);
    for (std::size_t i = 0; i < 64; ++i) mask.data()[3 * i + 1] = 1;
    const auto cloud = reconstruct_cloud(depth, mask, kK, SurfaceClass::Riser);
    EXPECT_EQ(cloud.size(), 0u);
    EXPECT_EQ(cloud.dropped_pixels, 64u);
}

TEST(Cloud, MatchesBruteForceOracleBitExactly) {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t h = 1 + trial % 13, w = 1 + (trial * 7) % 17;
        const auto depth = random_depth(rng, h, w, 0.2);
        const auto scores = random_scores(rng, h, w, trial % 2 == 0);
        const auto mask = harden_mask(scores);
        for (SurfaceClass cls : {SurfaceClass::Background, SurfaceClass::Riser, SurfaceClass::Tread}) {
            const auto want = oracle::brute_force_cloud(depth, scores, kK, cls);
            for (std::size_t threads : {1u, 3u, 8u})
                expect_identical(reconstruct_cloud(depth, mask, kK, cls, nullptr, threads), want);
        }
    }
}

TEST(Cloud, ClassesPartitionPixels) {
    std::mt19937 rng(4);
    const auto depth = random_depth(rng, 40, 30, 0.1);
    const auto mask = harden_mask(random_scores(rng, 40, 30, false));
    std::size_t points = 0, dropped = 0;
    std::vector<std::uint32_t> seen;
    for (SurfaceClass cls : {SurfaceClass::Background, SurfaceClass::Riser, SurfaceClass::Tread}) {
        const auto c = reconstruct_cloud(depth, mask, kK, cls);
        points += c.size();
        dropped += c.dropped_pixels;
        seen.insert(seen.end(), c.source_pixels.begin(), c.source_pixels.end());
    }
    EXPECT_EQ(points + dropped, 40u * 30u);
    std::sort(seen.begin(), seen.end());
    EXPECT_EQ(std::adjacent_find(seen.begin(), seen.end()), seen.end());
}

TEST(Cloud, DepthScalingScalesPoints) {
    std::mt19937 rng(5);
    auto depth = random_depth(rng, 12, 12, 0.0);
    const auto mask = harden_mask(random_scores(rng, 12, 12, false));
    const auto a = reconstruct_cloud(depth, mask, kK, SurfaceClass::Tread);
    for (float& v : depth.data()) v *= 2.0f;
    const auto b = reconstruct_cloud(depth, mask, kK, SurfaceClass::Tread);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_NEAR(b.points[i].x, 2 * a.points[i].x, 1e-12);
        EXPECT_NEAR(b.points[i].y, 2 * a.points[i].y, 1e-12);
        EXPECT_NEAR(b.points[i].z, 2 * a.points[i].z, 1e-12);
    }
}

TEST(Cloud, ReprojectsOntoSourcePixel) {
    std::mt19937 rng(6);
    const auto depth = random_depth(rng, 20, 20, 0.1);
    const auto mask = harden_mask(random_scores(rng, 20, 20, false));
    const auto cloud = reconstruct_cloud(depth, mask, kK, SurfaceClass::Riser);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& p = cloud.points[i];
        const double x = kK.fx * p.x / p.z + kK.cx - 0.5, y = kK.fy * p.y / p.z + kK.cy - 0.5;
        EXPECT_NEAR(x, cloud.source_pixels[i] % 20, 1e-9);
        EXPECT_NEAR(y, cloud.source_pixels[i] / 20, 1e-9);
    }
}

TEST(Cloud, RejectsBadInputs) {
    TensorGrid depth({4, 4}), mask({4, 4, 3}, DType::U8);
    depth.at(1, 1) = -1;
    EXPECT_THROW(reconstruct_cloud(depth, mask, kK, SurfaceClass::Tread), FormatError);
    EXPECT_THROW(reconstruct_cloud(TensorGrid({4, 5}), mask, kK, SurfaceClass::Tread), DimensionError);
    const TensorGrid rgb({4, 3, 3});
    EXPECT_THROW(reconstruct_cloud(TensorGrid({4, 4}), mask, kK, SurfaceClass::Tread, &rgb), DimensionError);
}

TEST(Cloud, CountsOutOfRangeWithoutClamping) {
    const TensorGrid depth({1, 4}, DType::F32, {0.0f, 0.1f, 5.0f, 12.0f});
    EXPECT_EQ(count_out_of_range(depth, DepthRange{}), 2u);
}

TEST(Ply, EmptyCloud) {
    const PointCloud cloud;
    const auto text = format_ply(cloud);
    EXPECT_NE(text.find("element vertex 0\n"), std::string::npos);
    EXPECT_EQ(parse_ply(text).size(), 0u);
}

TEST(Ply, SinglePointLine) {
    PointCloud cloud;
    cloud.points.push_back({0, 0, 2});
    const auto text = format_ply(cloud);
    EXPECT_NE(text.find("end_header\n0 0 2\n"), std::string::npos);
}

TEST(Ply, RoundTripWithColors) {
    std::mt19937 rng(7);
    auto depth = random_depth(rng, 16, 16, 0.1);
    const auto mask = harden_mask(random_scores(rng, 16, 16, false));
    TensorGrid rgb({16, 16, 3}, DType::U8);
    std::uniform_int_distribution<int> byte(0, 255);
    for (float& v : rgb.data()) v = static_cast<float>(byte(rng));
    const auto cloud = reconstruct_cloud(depth, mask, kK, SurfaceClass::Tread, &rgb);
    const auto path = std::filesystem::temp_directory_path() / "stairkit_test_cloud.ply";
    write_ply(cloud, path);
    const auto back = read_ply(path);
    EXPECT_EQ(back.class_id, SurfaceClass::Tread);
    ASSERT_EQ(back.size(), cloud.size());
    ASSERT_TRUE(back.has_colors());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        EXPECT_NEAR(back.points[i].x, cloud.points[i].x, 1e-6);
        EXPECT_NEAR(back.points[i].y, cloud.points[i].y, 1e-6);
        EXPECT_NEAR(back.points[i].z, cloud.points[i].z, 1e-6);
        EXPECT_EQ(back.colors[i], cloud.colors[i]);
    }
    EXPECT_THROW(parse_ply("not a ply"), FormatError);
}

}  // namespace
}  // namespace stairkit
