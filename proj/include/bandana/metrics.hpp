#pragma once

#include <span>
#include <utility>
#include <vector>

namespace bandana {

/// P(pos > neg) + 0.5 P(pos == neg), counted exactly. Throws on empty input.
double auc(std::span<const double> pos, std::span<const double> neg);

/// Mean precision at the rank of each positive in descending score order.
/// At equal scores negatives are ranked first. Throws on empty positives.
double average_precision(std::span<const double> pos, std::span<const double> neg);

/// Fraction of positives scoring strictly above the k-th highest negative.
/// Requires 1 <= k <= |neg|.
double hits_at_k(std::span<const double> pos, std::span<const double> neg, std::size_t k);

struct F1Scores {
    double micro = 0.0;
    double macro = 0.0;
};

/// Micro-F1 (accuracy for single-label data) and the unweighted mean of
/// per-class F1 over every class occurring in labels or predictions.
F1Scores micro_macro_f1(std::span<const int> predictions, std::span<const int> labels);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation, 0 for a single value
};

MeanStd mean_std(std::span<const double> values);

}  // namespace bandana
