#include "stairkit/metrics.hpp"

#include "stairkit/error.hpp"

#include <fmt/format.h>

namespace stairkit {

namespace {

std::size_t argmax3(const float* px) {
    std::size_t best = 0;
    if (px[1] > px[best]) best = 1;
    if (px[2] > px[best]) best = 2;
    return best;
}

std::string value_or_nan(const std::optional<double>& v) {
    return v ? fmt::format("{:.6f}", *v) : std::string("nan");
}

}  // namespace

ConfusionCounts cell_confusion(const TensorGrid& pred_heat, const TensorGrid& gt_heat, double conf) {
    if (pred_heat.size() != gt_heat.size() || pred_heat.rows() != gt_heat.rows() ||
        pred_heat.cols() != gt_heat.cols() || pred_heat.channels() != 1 || gt_heat.channels() != 1)
        throw DimensionError(fmt::format("heat grids differ: {} vs {}", dims_string(pred_heat.dims()),
                                         dims_string(gt_heat.dims())));
    ConfusionCounts c;
    for (std::size_t i = 0; i < gt_heat.size(); ++i) {
        const bool p = pred_heat.data()[i] >= conf;
        const bool g = gt_heat.data()[i] >= conf;
        if (p && g) ++c.tp;
        else if (p) ++c.fp;
        else if (g) ++c.fn;
        else ++c.tn;
    }
    return c;
}

LineScores precision_recall_iou(const ConfusionCounts& c) {
    LineScores s;
    const auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    s.precision = ratio(c.tp, c.tp + c.fp);
    s.recall = ratio(c.tp, c.tp + c.fn);
    s.iou = ratio(c.tp, c.tp + c.fp + c.fn);
    return s;
}

std::optional<PixelScores> pixel_accuracy(const TensorGrid& pred, const TensorGrid& gt) {
    if (pred.rank() != 3 || pred.channels() != 3 || !pred.same_shape(gt))
        throw DimensionError(fmt::format("masks must both be H x W x 3: {} vs {}", dims_string(pred.dims()),
                                         dims_string(gt.dims())));
    std::array<std::size_t, 3> gt_count{}, correct{};
    std::size_t pixels = 0;
    for (std::size_t i = 0; i < gt.rows() * gt.cols(); ++i) {
        const float* gp = gt.data().data() + 3 * i;
        // Unlabelled ground-truth pixels (all channels zero) are ignored.
        if (!(gp[0] > 0 || gp[1] > 0 || gp[2] > 0)) continue;
        ++pixels;
        const std::size_t g = argmax3(gp);
        ++gt_count[g];
        if (argmax3(pred.data().data() + 3 * i) == g) ++correct[g];
    }
    if (pixels == 0) return std::nullopt;

    PixelScores s;
    std::size_t all_correct = 0, present = 0;
    double acc_sum = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        all_correct += correct[k];
        if (gt_count[k] == 0) continue;
        s.per_class[k] = static_cast<double>(correct[k]) / static_cast<double>(gt_count[k]);
        acc_sum += *s.per_class[k];
        ++present;
    }
    s.pa = static_cast<double>(all_correct) / static_cast<double>(pixels);
    s.mpa = acc_sum / static_cast<double>(present);
    return s;
}

std::string format_metrics(const LineScores& lines, const std::optional<PixelScores>& pixels) {
    std::string out;
    out += "precision = " + value_or_nan(lines.precision) + "\n";
    out += "recall = " + value_or_nan(lines.recall) + "\n";
    out += "iou = " + value_or_nan(lines.iou) + "\n";
    out += "pa = " + value_or_nan(pixels ? std::optional(pixels->pa) : std::nullopt) + "\n";
    out += "mpa = " + value_or_nan(pixels ? std::optional(pixels->mpa) : std::nullopt) + "\n";
    return out;
}

}  // namespace stairkit
