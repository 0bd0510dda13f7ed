#pragma once

#include "stairkit/tensor.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace stairkit {

/**
 * Reference implementations of the training losses. They are numerical oracles
 * for checking a training implementation, so everything runs in double and every
 * loss has a closed-form partial derivative next to it.
 */
struct LossConfig {
    double alpha1 = 15.0;  ///< positive-cell confidence weight
    double alpha2 = 5.0;   ///< negative-cell confidence weight
    double lambda1 = 10.0; ///< x-coordinate location weight
    double lambda2 = 10.0; ///< y-coordinate location weight
    double psi = 10.0;     ///< depth weight
    std::size_t num_classes = 3;

    void validate() const;
};

/// Inputs of the line loss for one line kind over an M x N cell grid.
struct LineLossInput {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> pred_conf;  ///< M*N
    std::vector<double> gt_conf;    ///< M*N
    std::vector<double> gt_mask;    ///< M*N, 0 or 1
    std::vector<double> pred_loc;   ///< M*N*4 as (x1, y1, x2, y2)
    std::vector<double> gt_loc;     ///< M*N*4

    std::size_t cells() const noexcept { return rows * cols; }
    void validate() const;

    /// From heat (M x N [x 1]) and location (M x N x 4) grids; the mask is gt heat > 0.
    static LineLossInput from_grids(const TensorGrid& pred_heat, const TensorGrid& pred_loc,
                                    const TensorGrid& gt_heat, const TensorGrid& gt_loc);
};

/// Weighted confidence MSE plus masked location loss, averaged over all M*N cells.
double line_loss(const LineLossInput& in, const LossConfig& cfg);

/// Mean BCE over every pixel and class. Returns whether any prediction had to be clamped.
struct SegLossResult {
    double value = 0;
    bool clamped = false;
};
inline constexpr double kSegEpsilon = 1e-7;
SegLossResult seg_loss(std::span<const double> pred, std::span<const double> gt);

/// psi * mean squared error.
double depth_loss(std::span<const double> pred, std::span<const double> gt, const LossConfig& cfg);

struct LossBreakdown {
    double convex_line = 0;
    double concave_line = 0;
    double seg = 0;
    double depth = 0;
    double total = 0;
};

LossBreakdown total_loss(const LineLossInput& convex, const LineLossInput& concave,
                         std::span<const double> seg_pred, std::span<const double> seg_gt,
                         std::span<const double> depth_pred, std::span<const double> depth_gt,
                         const LossConfig& cfg);

/// Sums already-computed terms.
LossBreakdown combine_losses(double convex_line, double concave_line, double seg, double depth);

/**
 * Splits the fixed lambda budget (20 by default) between the axes in proportion to
 * the per-axis validation error. Both errors zero leaves the weights unchanged.
 */
std::pair<double, double> update_dynamic_weights(std::pair<double, double> prev, double eval_x_error,
                                                 double eval_y_error);

// Closed-form partial derivatives.
double line_loss_grad_conf(const LineLossInput& in, const LossConfig& cfg, std::size_t cell);
double line_loss_grad_loc(const LineLossInput& in, const LossConfig& cfg, std::size_t index);
double seg_loss_grad(std::span<const double> pred, std::span<const double> gt, std::size_t index);
double depth_loss_grad(std::span<const double> pred, std::span<const double> gt, const LossConfig& cfg,
                       std::size_t index);

struct GradCheck {
    double analytic = 0;
    double numeric = 0;

    /// |analytic - numeric| / max(|analytic|, |numeric|, floor).
    double relative_error(double floor = 1e-12) const;
};

/// Central difference (L(x + h) - L(x - h)) / 2h at one coordinate of `input`.
double central_difference(const std::function<double(std::span<const double>)>& loss,
                          std::span<const double> input, std::size_t index, double h);

GradCheck finite_diff_check(const std::function<double(std::span<const double>)>& loss,
                            std::span<const double> input, std::size_t index, double h, double analytic);

}  // namespace stairkit
