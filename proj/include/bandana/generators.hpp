#pragma once

#include <cstdint>

#include "bandana/graph.hpp"

namespace bandana {

/// Points on the swiss-roll surface in 3-space, joined by a symmetrized
/// k-nearest-neighbour graph. Identity features, no labels.
/// t = 1.5 pi (1 + 2u), point = (t cos t, 21 v, t sin t).
Graph gen_swiss_roll(std::size_t n, std::size_t k_neighbors, std::uint64_t seed, double noise = 0.0);

/// Two interleaved half circles in the plane (the usual "moons" layout),
/// Gaussian noise of the given standard deviation, symmetrized kNN graph.
/// Identity features; labels 0 (outer moon) and 1 (inner moon).
Graph gen_two_moon(std::size_t n, std::size_t k_neighbors, double noise, std::uint64_t seed);

/// Zachary's karate club: 34 nodes, 78 edges, identity features and a
/// 4-community labelling.
Graph gen_karate_club();

/// G(n, p) with identity features.
Graph gen_erdos_renyi(std::size_t n, double p, std::uint64_t seed);

/// Undirected kNN graph of the rows of `points`: each point is joined to its
/// k closest others (exact distances, ties by index), then symmetrized.
std::vector<Edge> knn_edges(const Matrix& points, std::size_t k);

/// Point clouds used by the generators, exposed for tests and plotting.
Matrix swiss_roll_points(std::size_t n, std::uint64_t seed, double noise = 0.0);
Matrix two_moon_points(std::size_t n, double noise, std::uint64_t seed, std::vector<int>* labels = nullptr);

}  // namespace bandana
