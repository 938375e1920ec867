#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "bandana/graph.hpp"
#include "bandana/rng.hpp"

namespace bandana {

/// Disjoint positive edge sets plus frozen evaluation negatives. Every list
/// holds canonical (u < v) pairs.
struct EdgeSplit {
    std::vector<Edge> train_pos;
    std::vector<Edge> val_pos;
    std::vector<Edge> test_pos;
    std::vector<Edge> val_neg;
    std::vector<Edge> test_neg;
    std::uint64_t seed = 0;

    bool operator==(const EdgeSplit&) const = default;
};

/// Uniformly partitions the undirected edges into train / val / test with
/// round(train_frac * E) and round(val_frac * E) edges; test gets the rest.
/// Negatives for val and test are drawn from non-edges of the full graph,
/// disjoint from each other, one per positive (fewer only when the graph
/// has too few non-edges). Throws std::invalid_argument if the fractions
/// are outside (0, 1), sum to 1 or more, or leave a set empty.
EdgeSplit split_edges(const Graph& graph, double train_frac, double val_frac, std::uint64_t seed);

/// `count` distinct node pairs drawn uniformly among pairs that are neither
/// edges of `graph` nor listed in `exclude`. Throws std::invalid_argument
/// when fewer than `count` such pairs exist.
std::vector<Edge> sample_negative_edges(const Graph& graph, std::size_t count,
                                        std::span<const Edge> exclude, Rng& rng);
std::vector<Edge> sample_negative_edges(const Graph& graph, std::size_t count,
                                        std::span<const Edge> exclude, std::uint64_t seed);

/// The graph restricted to the split's training edges.
Graph train_graph(const Graph& graph, const EdgeSplit& split);

void write_split(const EdgeSplit& split, const std::filesystem::path& path);
EdgeSplit read_split(const std::filesystem::path& path);

}  // namespace bandana
