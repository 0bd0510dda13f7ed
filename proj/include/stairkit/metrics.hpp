#pragma once

#include "stairkit/tensor.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <string>

namespace stairkit {

struct ConfusionCounts {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::size_t total() const noexcept { return tp + fp + fn + tn; }
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// A cell is positive in either grid when its value is >= conf.
ConfusionCounts cell_confusion(const TensorGrid& pred_heat, const TensorGrid& gt_heat, double conf = 0.5);

/// Each ratio is nullopt when its denominator is zero.
struct LineScores {
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> iou;
};
LineScores precision_recall_iou(const ConfusionCounts& c);

struct PixelScores {
    double pa = 0;
    double mpa = 0;
    /// Per-class accuracy; nullopt for classes absent from the ground truth.
    std::array<std::optional<double>, 3> per_class;
};

/// PA and MPA over hardened H x W x 3 masks. nullopt when the ground truth has no labelled pixel.
std::optional<PixelScores> pixel_accuracy(const TensorGrid& pred, const TensorGrid& gt);

/// `key = value` lines; undefined entries are written as `nan`.
std::string format_metrics(const LineScores& lines, const std::optional<PixelScores>& pixels);

}  // namespace stairkit
