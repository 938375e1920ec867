#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bandana/graph.hpp"
#include "bandana/losses.hpp"
#include "bandana/masking.hpp"
#include "bandana/model.hpp"
#include "bandana/split.hpp"

namespace bandana {

struct TrainConfig {
    std::size_t num_layers = 2;
    std::size_t hidden_dim = 256;
    std::size_t out_dim = 256;
    std::size_t decoder_hidden = 64;
    double lr = 1e-2;
    double temperature = 1.0;
    MaskKind mask_kind = MaskKind::bandwidth;
    double mask_ratio = 0.7;  // p for bernoulli / uniform / truncgauss
    double encoder_dropout = 0.5;
    double decoder_dropout = 0.0;
    double weight_decay = 5e-5;  // encoder tensors only
    std::size_t max_epochs = 1000;
    std::size_t patience = 30;
    double neg_per_pos = 1.0;
    std::uint64_t seed = 0;
    LayerwiseMode layerwise = LayerwiseMode::lwp;
    double bn_momentum = 0.1;

    /// Throws std::invalid_argument describing the first bad field.
    void validate() const;
    ModelConfig model_config(std::size_t in_dim) const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double loss = 0.0;
    double val_auc = 0.0;
    bool operator==(const EpochRecord&) const = default;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0;  // 0 when no epoch ran
    double best_val_auc = 0.0;
    std::string stop_reason;     // "max_epochs", "patience", "diverged", "no_epochs"
    bool operator==(const TrainHistory&) const = default;
};

struct TrainResult {
    ModelParams params;
    TrainHistory history;
};

/// Masked pretraining on the split's training graph. Masks of
/// `config.mask_kind` are resampled every epoch; bandwidth-style kinds use
/// the bandwidth loss (layer-wise per `config.layerwise`), bernoulli
/// dispatches to the discrete baseline. Validation AUC of dot-product
/// probing drives early stopping and the best parameters are restored.
TrainResult pretrain(const Graph& graph, const EdgeSplit& split, const TrainConfig& config);

/// Discrete masked autoencoder: one Bernoulli mask per epoch shared by all
/// layers, propagation on surviving edges, cross-entropy on the masked-out
/// edges against negatives. Throws for p == 0 (nothing to reconstruct).
TrainResult pretrain_discrete_baseline(const Graph& graph, const EdgeSplit& split, const TrainConfig& config);

/// Embeddings used by the probes: last layer for links, all layers
/// concatenated for nodes. Both are eval-mode encodings of `graph`.
Matrix link_embeddings(const ModelParams& params, const Graph& graph);
Matrix node_embeddings(const ModelParams& params, const Graph& graph);

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path);

}  // namespace bandana
