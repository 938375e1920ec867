#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bandana/autograd.hpp"
#include "bandana/graph.hpp"
#include "bandana/model.hpp"

namespace bandana {

/// Mean over positives of -[t log r + (1-t) log(1-r)] plus mean over
/// negatives of -log(1-r). Scores are probabilities (m x 1).
Var bandwidth_loss(Var pos_scores, std::span<const Real> pos_targets, Var neg_scores);

/// Mean over masked edges of -log r plus mean over negatives of -log(1-r).
/// An empty negative set contributes nothing.
Var discrete_ce_loss(Var masked_pos_scores, Var neg_scores);

enum class LayerwiseMode { lwp, lwm, last };

std::string to_string(LayerwiseMode mode);
std::optional<LayerwiseMode> parse_layerwise_mode(std::string_view name);

/// Positive edges scored once per undirected pair and shared by both
/// directions (the decoder is symmetric in its two endpoints).
struct EdgeBatch {
    std::vector<Edge> pos;        // undirected
    std::vector<std::size_t> dir; // directed position -> index into pos (2 per edge)
    std::vector<Edge> neg;        // undirected negatives
};

/// Builds the directed layout (u->v, v->u) for each undirected edge.
EdgeBatch make_edge_batch(std::vector<Edge> pos, std::vector<Edge> neg);

/// Bandwidth loss of one layer's representations against directed targets.
Var layer_bandwidth_loss(const BoundParams& bound, const ModelConfig& config, Var z,
                         std::span<const Real> targets, const EdgeBatch& batch, bool train, Rng& rng);

/// LWP: mean over layers k of the layer-k loss with layer-k targets.
/// LWM and last: the last layer's loss against the last target set.
/// Throws std::invalid_argument when LWP gets fewer target sets than layers.
Var layerwise_loss(const BoundParams& bound, const ModelConfig& config, std::span<const Var> per_layer_z,
                   std::span<const std::vector<Real>> per_layer_targets, const EdgeBatch& batch,
                   LayerwiseMode mode, bool train, Rng& rng);

}  // namespace bandana
