#include "stairkit/losses.hpp"

#include "stairkit/error.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace stairkit {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw DimensionError(fmt::format("{}: sizes differ ({} vs {})", what, a, b));
}

}  // namespace

void LossConfig::validate() const {
    if (!(alpha1 > 0 && alpha2 > 0 && lambda1 > 0 && lambda2 > 0 && psi > 0))
        throw Error("loss weights must be positive");
    if (num_classes == 0) throw Error("num_classes must be positive");
}

void LineLossInput::validate() const {
    const std::size_t n = cells();
    if (n == 0) throw DimensionError("line loss: empty grid");
    require_same_size(pred_conf.size(), n, "line loss pred_conf");
    require_same_size(gt_conf.size(), n, "line loss gt_conf");
    require_same_size(gt_mask.size(), n, "line loss gt_mask");
    require_same_size(pred_loc.size(), 4 * n, "line loss pred_loc");
    require_same_size(gt_loc.size(), 4 * n, "line loss gt_loc");
    for (double h : gt_mask)
        if (h != 0.0 && h != 1.0) throw Error(fmt::format("line loss: mask value {} is not 0 or 1", h));
}

LineLossInput LineLossInput::from_grids(const TensorGrid& pred_heat, const TensorGrid& pred_loc,
                                        const TensorGrid& gt_heat, const TensorGrid& gt_loc) {
    if (pred_heat.channels() != 1 || gt_heat.channels() != 1 || pred_loc.channels() != 4 ||
        gt_loc.channels() != 4)
        throw DimensionError("line loss: heat grids need 1 channel and location grids 4");
    if (pred_heat.rows() != gt_heat.rows() || pred_heat.cols() != gt_heat.cols() ||
        pred_loc.rows() != gt_heat.rows() || pred_loc.cols() != gt_heat.cols() ||
        gt_loc.rows() != gt_heat.rows() || gt_loc.cols() != gt_heat.cols())
        throw DimensionError("line loss: grid shapes disagree");
    LineLossInput in;
    in.rows = gt_heat.rows();
    in.cols = gt_heat.cols();
    in.pred_conf.assign(pred_heat.data().begin(), pred_heat.data().end());
    in.gt_conf.assign(gt_heat.data().begin(), gt_heat.data().end());
    in.gt_mask.resize(in.gt_conf.size());
    std::transform(in.gt_conf.begin(), in.gt_conf.end(), in.gt_mask.begin(),
                   [](double v) { return v > 0.0 ? 1.0 : 0.0; });
    in.pred_loc.assign(pred_loc.data().begin(), pred_loc.data().end());
    in.gt_loc.assign(gt_loc.data().begin(), gt_loc.data().end());
    return in;
}

double line_loss(const LineLossInput& in, const LossConfig& cfg) {
    in.validate();
    cfg.validate();
    double sum = 0;
    for (std::size_t i = 0; i < in.cells(); ++i) {
        const double h = in.gt_mask[i];
        const double dp = in.pred_conf[i] - in.gt_conf[i];
        double term = (cfg.alpha1 * h + cfg.alpha2 * (1.0 - h)) * dp * dp;
        if (h != 0.0) {
            const double* t = &in.pred_loc[4 * i];
            const double* g = &in.gt_loc[4 * i];
            const double ex = 0.5 * ((t[0] - g[0]) * (t[0] - g[0]) + (t[2] - g[2]) * (t[2] - g[2]));
            const double ey = 0.5 * ((t[1] - g[1]) * (t[1] - g[1]) + (t[3] - g[3]) * (t[3] - g[3]));
            term += h * (cfg.lambda1 * ex + cfg.lambda2 * ey);
        }
        sum += term;
    }
    return sum / static_cast<double>(in.cells());
}

SegLossResult seg_loss(std::span<const double> pred, std::span<const double> gt) {
    require_same_size(pred.size(), gt.size(), "seg loss");
    if (pred.empty()) throw DimensionError("seg loss: empty input");
    SegLossResult r;
    double sum = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double m = pred[i];
        if (m < kSegEpsilon || m > 1.0 - kSegEpsilon) {
            m = std::clamp(m, kSegEpsilon, 1.0 - kSegEpsilon);
            r.clamped = true;
        }
        sum -= gt[i] * std::log(m) + (1.0 - gt[i]) * std::log(1.0 - m);
    }
    r.value = sum / static_cast<double>(pred.size());
    return r;
}

double depth_loss(std::span<const double> pred, std::span<const double> gt, const LossConfig& cfg) {
    require_same_size(pred.size(), gt.size(), "depth loss");
    if (pred.empty()) throw DimensionError("depth loss: empty input");
    double sum = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) sum += (pred[i] - gt[i]) * (pred[i] - gt[i]);
    return cfg.psi * sum / static_cast<double>(pred.size());
}

LossBreakdown combine_losses(double convex_line, double concave_line, double seg, double depth) {
    return {convex_line, concave_line, seg, depth, convex_line + concave_line + seg + depth};
}

LossBreakdown total_loss(const LineLossInput& convex, const LineLossInput& concave,
                         std::span<const double> seg_pred, std::span<const double> seg_gt,
                         std::span<const double> depth_pred, std::span<const double> depth_gt,
                         const LossConfig& cfg) {
    return combine_losses(line_loss(convex, cfg), line_loss(concave, cfg), seg_loss(seg_pred, seg_gt).value,
                          depth_loss(depth_pred, depth_gt, cfg));
}

std::pair<double, double> update_dynamic_weights(std::pair<double, double> prev, double eval_x_error,
                                                 double eval_y_error) {
    if (eval_x_error < 0 || eval_y_error < 0) throw Error("evaluation errors must be non-negative");
    const double sum = eval_x_error + eval_y_error;
    if (sum == 0.0) return prev;
    const double budget = prev.first + prev.second;
    return {budget * eval_x_error / sum, budget * eval_y_error / sum};
}

double line_loss_grad_conf(const LineLossInput& in, const LossConfig& cfg, std::size_t cell) {
    const double h = in.gt_mask.at(cell);
    return 2.0 * (cfg.alpha1 * h + cfg.alpha2 * (1.0 - h)) * (in.pred_conf[cell] - in.gt_conf[cell]) /
           static_cast<double>(in.cells());
}

double line_loss_grad_loc(const LineLossInput& in, const LossConfig& cfg, std::size_t index) {
    const double h = in.gt_mask.at(index / 4);
    const double lambda = index % 2 == 0 ? cfg.lambda1 : cfg.lambda2;
    // Each axis averages two coordinates, so d/dt of lambda * (e^2 + e'^2) / 2 is lambda * e.
    return h * lambda * (in.pred_loc.at(index) - in.gt_loc.at(index)) / static_cast<double>(in.cells());
}

double seg_loss_grad(std::span<const double> pred, std::span<const double> gt, std::size_t index) {
    const double m = pred[index], g = gt[index];
    return (-g / m + (1.0 - g) / (1.0 - m)) / static_cast<double>(pred.size());
}

double depth_loss_grad(std::span<const double> pred, std::span<const double> gt, const LossConfig& cfg,
                       std::size_t index) {
    return 2.0 * cfg.psi * (pred[index] - gt[index]) / static_cast<double>(pred.size());
}

double GradCheck::relative_error(double floor) const {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

double central_difference(const std::function<double(std::span<const double>)>& loss,
                          std::span<const double> input, std::size_t index, double h) {
    std::vector<double> x(input.begin(), input.end());
    const double x0 = x.at(index);
    x[index] = x0 + h;
    const double up = loss(x);
    x[index] = x0 - h;
    const double down = loss(x);
    return (up - down) / (2.0 * h);
}

GradCheck finite_diff_check(const std::function<double(std::span<const double>)>& loss,
                            std::span<const double> input, std::size_t index, double h, double analytic) {
    return {analytic, central_difference(loss, input, index, h)};
}

}  // namespace stairkit
