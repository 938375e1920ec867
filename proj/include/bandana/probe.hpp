#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "bandana/graph.hpp"
#include "bandana/matrix.hpp"
#include "bandana/metrics.hpp"

namespace bandana {

struct LinkMetrics {
    double auc = 0.0;
    double ap = 0.0;
    std::map<std::size_t, double> hits;  // k -> Hits@k, for k <= |neg|
};

/// Raw dot products z_u . z_v. The sigmoid is monotone, so ranking metrics
/// are computed on these directly.
std::vector<double> dot_scores(const Matrix& z, std::span<const Edge> edges);

/// AUC, AP and Hits@{10,50,100} of dot-product scores. Throws on empty sets.
LinkMetrics dot_product_probe(const Matrix& z, std::span<const Edge> pos, std::span<const Edge> neg);

struct NodeSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
    bool operator==(const NodeSplit&) const = default;
};

/// Uniform split with round(train_frac n) train and round(val_frac n)
/// validation nodes; the rest is test. The train set is then subsampled to
/// round(label_ratio |train|) nodes. Throws if the train set ends up empty.
NodeSplit node_split(std::size_t num_nodes, double train_frac, double val_frac, double label_ratio,
                     std::uint64_t seed);

struct LinearProbeConfig {
    std::size_t epochs = 100;
    double lr = 1e-2;
    double weight_decay = 0.0;
    std::uint64_t seed = 0;
};

struct NodeMetrics {
    double micro_f1 = 0.0;
    double macro_f1 = 0.0;
    double accuracy = 0.0;
    double val_accuracy = 0.0;
    std::size_t best_epoch = 0;
};

/// Trains softmax regression on frozen embeddings (train nodes, full-batch
/// Adam) and reports test F1 at the epoch with the best validation
/// accuracy. `z` is not modified.
NodeMetrics linear_probe(const Matrix& z, std::span<const int> labels, const NodeSplit& split,
                         const LinearProbeConfig& config);

/// Column-wise standardization (zero mean, unit variance; constant columns
/// become zero).
Matrix standardize_columns(const Matrix& z);

}  // namespace bandana
