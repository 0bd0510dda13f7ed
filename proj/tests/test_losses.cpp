#include "stairkit/error.hpp"
#include "stairkit/losses.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace stairkit {
namespace {

const LossConfig kCfg;

LineLossInput single_cell(double h, double gt_conf, double pred_conf) {
    LineLossInput in;
    in.rows = in.cols = 1;
    in.pred_conf = {pred_conf};
    in.gt_conf = {gt_conf};
    in.gt_mask = {h};
    in.pred_loc = in.gt_loc = {0.1, 0.2, 0.9, 0.4};
    return in;
}

LineLossInput random_line_input(std::mt19937& rng, std::size_t rows, std::size_t cols) {
    std::uniform_real_distribution<double> u(0, 1);
    std::bernoulli_distribution pos(0.3);
    LineLossInput in;
    in.rows = rows;
    in.cols = cols;
    for (std::size_t i = 0; i < rows * cols; ++i) {
        const bool p = pos(rng);
        in.gt_mask.push_back(p ? 1.0 : 0.0);
        in.gt_conf.push_back(p ? 0.5 + 0.5 * u(rng) : 0.0);
        in.pred_conf.push_back(u(rng));
        for (int j = 0; j < 4; ++j) {
            in.pred_loc.push_back(u(rng));
            in.gt_loc.push_back(p ? u(rng) : 0.0);
        }
    }
    return in;
}

TEST(LineLoss, HandExamples) {
    EXPECT_NEAR(line_loss(single_cell(1, 1, 0.5), kCfg), 15 * 0.25, 1e-12);
    EXPECT_NEAR(line_loss(single_cell(0, 0, 0.5), kCfg), 5 * 0.25, 1e-12);
    EXPECT_EQ(line_loss(single_cell(1, 0.8, 0.8), kCfg), 0.0);
}

TEST(LineLoss, LocationTermAveragesEachAxis) {
    auto in = single_cell(1, 1, 1);
    in.pred_loc = {0.3, 0.2, 0.9, 0.4};  // x1 off by 0.2: lambda1 * (0.04 + 0) / 2
    EXPECT_NEAR(line_loss(in, kCfg), 10 * 0.04 / 2, 1e-12);
    in.pred_loc = {0.1, 0.5, 0.9, 0.1};  // y off by 0.3 twice: lambda2 * (0.09 + 0.09) / 2
    EXPECT_NEAR(line_loss(in, kCfg), 10 * 0.09, 1e-12);
}

TEST(LineLoss, NegativeCellsIgnoreLocations) {
    auto in = single_cell(0, 0, 0);
    in.pred_loc = {1, 1, 1, 1};
    EXPECT_EQ(line_loss(in, kCfg), 0.0);
}

TEST(LineLoss, AveragesOverAllCells) {
    std::mt19937 rng(1);
    const auto in = random_line_input(rng, 4, 6);
    double sum = 0;
    for (std::size_t i = 0; i < in.cells(); ++i) {
        LineLossInput one;
        one.rows = one.cols = 1;
        one.pred_conf = {in.pred_conf[i]};
        one.gt_conf = {in.gt_conf[i]};
        one.gt_mask = {in.gt_mask[i]};
        one.pred_loc.assign(in.pred_loc.begin() + 4 * i, in.pred_loc.begin() + 4 * i + 4);
        one.gt_loc.assign(in.gt_loc.begin() + 4 * i, in.gt_loc.begin() + 4 * i + 4);
        sum += line_loss(one, kCfg);
    }
    EXPECT_NEAR(line_loss(in, kCfg), sum / 24.0, 1e-12);
}

TEST(LineLoss, RejectsBadShapes) {
    auto in = single_cell(1, 1, 1);
    in.pred_loc.pop_back();
    EXPECT_THROW(line_loss(in, kCfg), DimensionError);
    in = single_cell(0.5, 1, 1);
    EXPECT_THROW(line_loss(in, kCfg), Error);
}

TEST(SegLoss, HandExamples) {
    const std::vector<double> half(12, 0.5), gt{1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 0, 0};
    EXPECT_NEAR(seg_loss(half, gt).value, std::log(2.0), 1e-12);
    EXPECT_NEAR(seg_loss(half, gt).value, 0.6931, 1e-4);

    const std::vector<double> p{0.9, 0.05, 0.05}, g{1, 0, 0};
    const double expected = (-std::log(0.9) - 2 * std::log(0.95)) / 3;
    EXPECT_NEAR(seg_loss(p, g).value, expected, 1e-12);
    EXPECT_NEAR(seg_loss(p, g).value, 0.0693, 1e-4);
    EXPECT_FALSE(seg_loss(p, g).clamped);
}

TEST(SegLoss, NearPerfectAndClamping) {
    const double e = kSegEpsilon;
    const std::vector<double> p{1 - e, e, e}, g{1, 0, 0};
    EXPECT_LE(seg_loss(p, g).value, 1.1e-7);
    const std::vector<double> hard{1, 0, 0};
    const auto r = seg_loss(hard, g);
    EXPECT_TRUE(r.clamped);
    EXPECT_TRUE(std::isfinite(r.value));
    EXPECT_LE(r.value, 1.1e-7);
}

TEST(DepthLoss, HandExamples) {
    const std::vector<double> a{0.1, 0.5, 0.9, 0.3}, b{0.2, 0.6, 1.0, 0.4};
    EXPECT_EQ(depth_loss(a, a, kCfg), 0.0);
    EXPECT_NEAR(depth_loss(a, b, kCfg), 0.1, 1e-12);
    EXPECT_NEAR(depth_loss(std::vector<double>{1.0}, std::vector<double>{0.0}, kCfg), 10.0, 1e-12);
    EXPECT_THROW(depth_loss(a, std::vector<double>{1.0}, kCfg), DimensionError);
}

TEST(TotalLoss, Additivity) {
    const auto zero = combine_losses(0, 0, 0, 0);
    EXPECT_EQ(zero.total, 0.0);
    EXPECT_EQ(combine_losses(1, 2, 3, 4).total, 10.0);

    std::mt19937 rng(2);
    const auto convex = random_line_input(rng, 3, 3), concave = random_line_input(rng, 3, 3);
    const std::vector<double> sp{0.2, 0.7, 0.1}, sg{0, 1, 0}, dp{0.3, 0.4}, dg{0.35, 0.1};
    const auto t = total_loss(convex, concave, sp, sg, dp, dg, kCfg);
    EXPECT_NEAR(t.total, line_loss(convex, kCfg) + line_loss(concave, kCfg) + seg_loss(sp, sg).value +
                             depth_loss(dp, dg, kCfg),
                1e-12);
}

TEST(DynamicWeights, Examples) {
    const std::pair<double, double> init{10, 10};
    EXPECT_EQ(update_dynamic_weights(init, 0.3, 0.3), init);
    const auto w = update_dynamic_weights(init, 3, 1);
    EXPECT_NEAR(w.first, 15, 1e-12);
    EXPECT_NEAR(w.second, 5, 1e-12);
    EXPECT_EQ(update_dynamic_weights(init, 2, 0), (std::pair<double, double>{20, 0}));
    EXPECT_EQ(update_dynamic_weights({12, 8}, 0, 0), (std::pair<double, double>{12, 8}));
    const auto again = update_dynamic_weights(w, 1, 1);
    EXPECT_NEAR(again.first + again.second, 20, 1e-12);
}

TEST(Gradients, DepthClosedForm) {
    const std::vector<double> p{0.7}, g{0.2};
    const double analytic = depth_loss_grad(p, g, kCfg, 0);
    EXPECT_NEAR(analytic, 10.0, 1e-12);
    const auto check = finite_diff_check(
        [&](std::span<const double> x) { return depth_loss(x, g, kCfg); }, p, 0, 1e-5, analytic);
    EXPECT_LE(check.relative_error(), 1e-6);
}

TEST(Gradients, LineLossMatchesCentralDifferences) {
    std::mt19937 rng(3);
    const auto in = random_line_input(rng, 5, 4);
    for (std::size_t c = 0; c < in.cells(); ++c) {
        const auto check = finite_diff_check(
            [&](std::span<const double> x) {
                LineLossInput v = in;
                v.pred_conf.assign(x.begin(), x.end());
                return line_loss(v, kCfg);
            },
            in.pred_conf, c, 1e-5, line_loss_grad_conf(in, kCfg, c));
        EXPECT_LE(check.relative_error(1e-9), 1e-5) << "conf " << c;
    }
    for (std::size_t i = 0; i < in.pred_loc.size(); ++i) {
        const auto check = finite_diff_check(
            [&](std::span<const double> x) {
                LineLossInput v = in;
                v.pred_loc.assign(x.begin(), x.end());
                return line_loss(v, kCfg);
            },
            in.pred_loc, i, 1e-5, line_loss_grad_loc(in, kCfg, i));
        EXPECT_LE(check.relative_error(1e-9), 1e-5) << "loc " << i;
    }
}

TEST(Gradients, SegLossMatchesCentralDifferences) {
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    std::vector<double> pred(30), gt(30, 0.0);
    for (auto& v : pred) v = u(rng);
    for (std::size_t i = 0; i < 30; i += 3) gt[i + rng() % 3] = 1.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const auto check = finite_diff_check(
            [&](std::span<const double> x) { return seg_loss(x, gt).value; }, pred, i, 1e-5,
            seg_loss_grad(pred, gt, i));
        EXPECT_LE(check.relative_error(), 1e-5) << i;
    }
}

}  // namespace
}  // namespace stairkit
