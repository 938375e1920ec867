#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bandana/graph.hpp"
#include "bandana/rng.hpp"
#include "bandana/sparse.hpp"

namespace bandana {

/// (1 / n_i) sum over j in N_i of |x_i - x_j|^2 with n_i = deg(i) + 1.
double ego_dirichlet_energy(const Graph& graph, const Matrix& features, std::size_t node);

/// Sum of ego energies, accumulated edge by edge.
double global_dirichlet_energy(const Graph& graph, const Matrix& features);

struct EnergyTheoremReport {
    std::size_t trials = 0;
    std::size_t violations = 0;        // masked energy above the original
    std::size_t equality_checks = 0;   // trials run with keep probability 1
    double max_equality_gap = 0.0;     // largest |masked - original| at keep 1
};

/// Random ego graphs whose neighbours share one feature vector: each edge
/// from the centre survives with probability `keep_prob` (leaf-leaf edges
/// are kept as well) and the centre's energy in the component containing it
/// is compared with the unmasked energy. Trials cycle through `keep_probs`.
EnergyTheoremReport verify_energy_theorem(std::size_t trials, std::span<const double> keep_probs, Rng& rng);

struct Histogram {
    std::vector<double> edges;  // bins + 1 boundaries
    std::vector<std::size_t> counts;
    double median = 0.0;
    std::size_t samples = 0;
};

/// Shannon entropy (natural log) of each node's incoming off-diagonal
/// weights renormalized to sum 1. Target-major weights; nodes with fewer
/// than two in-neighbours are skipped. Throws on negative weights or an
/// all-zero row that has neighbours.
std::vector<double> ego_entropies(const SparseMatrix& weights);

/// Equal-width histogram over [0, max(values)] plus the median.
Histogram histogram(std::span<const double> values, std::size_t bins);

struct Components {
    std::size_t count = 0;
    std::size_t giant = 0;
};

/// Connected components via union-find. With a mask (target-major, graph's
/// A + I pattern) only edges whose value exceeds `threshold` in either
/// direction count as present.
Components count_components(const Graph& graph, const SparseMatrix* mask = nullptr, double threshold = 0.0);

/// Projection onto the top two principal directions (power iteration with
/// deflation on the covariance). Returns n x 2, centred.
Matrix pca2d(const Matrix& z);

/// CSV "node,dim0,dim1,...".
void export_embeddings(const Matrix& z, const std::filesystem::path& path);

struct DiagnosticsReport {
    std::optional<double> global_energy;
    std::vector<double> ego_energies;
    std::optional<Histogram> entropy;
    std::optional<Components> components;
    std::optional<Components> components_unmasked;
    std::optional<double> mask_ratio_calculated;
    std::optional<double> mask_ratio_measured;
};

}  // namespace bandana
