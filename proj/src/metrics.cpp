#include "bandana/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace bandana {

double auc(std::span<const double> pos, std::span<const double> neg) {
    if (pos.empty() || neg.empty()) throw std::invalid_argument("auc: empty score list");
    std::vector<double> sorted(neg.begin(), neg.end());
    std::sort(sorted.begin(), sorted.end());
    // twice the number of (pos, neg) wins, ties worth one
    std::uint64_t twice = 0;
    for (double s : pos) {
        const auto lo = std::lower_bound(sorted.begin(), sorted.end(), s);
        const auto hi = std::upper_bound(lo, sorted.end(), s);
        twice += 2 * static_cast<std::uint64_t>(lo - sorted.begin()) + static_cast<std::uint64_t>(hi - lo);
    }
    return static_cast<double>(twice) / (2.0 * static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

double average_precision(std::span<const double> pos, std::span<const double> neg) {
    if (pos.empty()) throw std::invalid_argument("average_precision: no positives");
    std::vector<std::pair<double, bool>> ranked;
    ranked.reserve(pos.size() + neg.size());
    for (double s : pos) ranked.emplace_back(s, true);
    for (double s : neg) ranked.emplace_back(s, false);
    // descending score; false (negative) before true at equal score
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    double sum = 0.0;
    std::size_t tp = 0;
    for (std::size_t r = 0; r < ranked.size(); ++r) {
        if (!ranked[r].second) continue;
        ++tp;
        sum += static_cast<double>(tp) / static_cast<double>(r + 1);
    }
    return sum / static_cast<double>(pos.size());
}

double hits_at_k(std::span<const double> pos, std::span<const double> neg, std::size_t k) {
    if (k == 0 || k > neg.size()) {
        throw std::invalid_argument("hits_at_k: k=" + std::to_string(k) + " outside [1, " +
                                    std::to_string(neg.size()) + "]");
    }
    if (pos.empty()) throw std::invalid_argument("hits_at_k: no positives");
    std::vector<double> sorted(neg.begin(), neg.end());
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end(),
                     std::greater<>());
    const double threshold = sorted[k - 1];
    const auto hits = std::count_if(pos.begin(), pos.end(), [&](double s) { return s > threshold; });
    return static_cast<double>(hits) / static_cast<double>(pos.size());
}

F1Scores micro_macro_f1(std::span<const int> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size()) {
        throw std::invalid_argument("micro_macro_f1: predictions and labels differ in length");
    }
    if (labels.empty()) throw std::invalid_argument("micro_macro_f1: empty input");
    struct Counts {
        std::size_t tp = 0, fp = 0, fn = 0;
    };
    std::map<int, Counts> per_class;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (predictions[i] == labels[i]) {
            ++correct;
            ++per_class[labels[i]].tp;
        } else {
            ++per_class[predictions[i]].fp;
            ++per_class[labels[i]].fn;
        }
    }
    F1Scores f;
    f.micro = static_cast<double>(correct) / static_cast<double>(labels.size());
    double sum = 0.0;
    for (const auto& [cls, c] : per_class) {
        const double denom = static_cast<double>(2 * c.tp + c.fp + c.fn);
        sum += denom > 0.0 ? 2.0 * static_cast<double>(c.tp) / denom : 0.0;
    }
    f.macro = sum / static_cast<double>(per_class.size());
    return f;
}

MeanStd mean_std(std::span<const double> values) {
    MeanStd r;
    if (values.empty()) return r;
    for (double v : values) r.mean += v;
    r.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - r.mean) * (v - r.mean);
        r.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return r;
}

}  // namespace bandana
