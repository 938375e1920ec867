#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bandana/graph.hpp"
#include "bandana/rng.hpp"
#include "bandana/sparse.hpp"

namespace bandana {

enum class MaskKind { bandwidth, bernoulli, uniform, truncgauss };

std::string to_string(MaskKind kind);
/// Accepts "bandwidth" (or "boltzmann-gibbs"), "bernoulli", "uniform", "truncgauss".
std::optional<MaskKind> parse_mask_kind(std::string_view name);

/// Per-layer masks on the pattern of A + I, stored target-major: row j
/// holds the slots (i, j) for i in N_j plus the diagonal slot (j, j).
///
/// Bandwidth layers are a softmax over each row's off-diagonal slots, so
/// every row sums to 1; the diagonal slot is 1 only for isolated nodes and
/// 0 otherwise. The other kinds keep the diagonal at 1.
struct MaskSet {
    std::vector<SparseMatrix> layers;
    MaskKind kind = MaskKind::bandwidth;
    double temperature = 0.0;  // bandwidth only
    double p = 0.0;            // mask ratio for the other kinds
};

/// The A + I pattern with every value set to `fill`.
SparseMatrix self_looped_pattern(const Graph& graph, Real fill = 0.0);

/// Independent Boltzmann-Gibbs bandwidths per layer: m ~ N(0, 1) per
/// directed slot, softmax with temperature `temperature` over each target's
/// in-neighbours. M_ij and M_ji are drawn separately.
MaskSet sample_bandwidth_masks(const Graph& graph, double temperature, std::size_t num_layers, Rng& rng);

/// Each undirected edge is dropped with probability p, both directions
/// together. Diagonal slots are 1.
MaskSet sample_bernoulli_masks(const Graph& graph, double p, std::size_t num_layers, Rng& rng);

/// Directed entries ~ U(0, 2 - 2p), p in (0.5, 1). Diagonal slots are 1.
MaskSet sample_uniform_masks(const Graph& graph, double p, std::size_t num_layers, Rng& rng);

/// Directed entries ~ N(1 - p, 1) truncated to [0, 2 - 2p] by rejection,
/// p in (0.5, 1). Diagonal slots are 1.
MaskSet sample_truncgauss_masks(const Graph& graph, double p, std::size_t num_layers, Rng& rng);

/// Dispatch on kind; `param` is the temperature for bandwidth and p otherwise.
MaskSet sample_masks(MaskKind kind, const Graph& graph, double param, std::size_t num_layers, Rng& rng);

/// Adjacency perturbed by one mask layer: mask values on edge slots and a
/// unit self-loop on every diagonal slot. Throws std::invalid_argument when
/// the mask pattern is not the graph's A + I pattern.
SparseMatrix perturbed_adjacency(const Graph& graph, const SparseMatrix& mask_layer);

/// 1 - n / (2 |E_train|), with |E_train| the undirected training edge count.
double calculated_mask_ratio(std::size_t num_nodes, std::size_t num_train_edges);
double calculated_mask_ratio(const Graph& graph, std::span<const Edge> train_edges);

/// 1 - mean off-diagonal mask value, averaged over layers. Bandwidth masks only.
double measured_mask_ratio(const MaskSet& masks);

/// Mean off-diagonal value of one layer.
double mean_edge_value(const SparseMatrix& mask_layer);

/// CSV "src,dst,layer,value" of every stored slot.
void write_mask_csv(const MaskSet& masks, const std::filesystem::path& path);

}  // namespace bandana
