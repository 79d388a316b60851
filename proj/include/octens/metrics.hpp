#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "octens/data.hpp"

namespace octens {

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct MetricReport {
    std::array<double, kNumLabels> per_label_f1{};
    double macro_f1 = 0.0;
    std::array<ConfusionCounts, kNumLabels> counts{};
};

inline constexpr double kDefaultThreshold = 0.5;

// value >= threshold maps to 1.
LabelMatrix binarize(const ScoreMatrix& scores, double threshold = kDefaultThreshold);

// F1 = 2tp / (2tp + fp + fn), defined as 0 when nothing is positive on either
// side. Macro F1 is the plain mean over the six labels.
MetricReport evaluate(const LabelMatrix& pred, const LabelMatrix& truth);

double f1_from_counts(const ConfusionCounts& c);

// Column-level building blocks behind evaluate(); usable for any label count.
ConfusionCounts count_confusion(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> truth);
double macro_average(std::span<const double> per_label_f1);

}  // namespace octens
