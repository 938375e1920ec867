#include "bandana/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "bandana/rng.hpp"

namespace bandana {

Matrix swiss_roll_points(std::size_t n, std::uint64_t seed, double noise) {
    Rng rng = Rng::derive(seed, "swiss-roll");
    Matrix p(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = 1.5 * std::numbers::pi * (1.0 + 2.0 * rng.uniform());
        const double y = 21.0 * rng.uniform();
        p(i, 0) = t * std::cos(t);
        p(i, 1) = y;
        p(i, 2) = t * std::sin(t);
    }
    if (noise > 0.0)
        for (double& v : p.values()) v += noise * rng.normal();
    return p;
}

Matrix two_moon_points(std::size_t n, double noise, std::uint64_t seed, std::vector<int>* labels) {
    Rng rng = Rng::derive(seed, "two-moon");
    const std::size_t n_outer = n / 2;
    const std::size_t n_inner = n - n_outer;
    Matrix p(n, 2);
    if (labels) labels->assign(n, 0);
    auto arc = [](std::size_t k, std::size_t count) {
        return count > 1 ? std::numbers::pi * static_cast<double>(k) / static_cast<double>(count - 1) : 0.0;
    };
    for (std::size_t k = 0; k < n_outer; ++k) {
        const double a = arc(k, n_outer);
        p(k, 0) = std::cos(a);
        p(k, 1) = std::sin(a);
    }
    for (std::size_t k = 0; k < n_inner; ++k) {
        const double a = arc(k, n_inner);
        p(n_outer + k, 0) = 1.0 - std::cos(a);
        p(n_outer + k, 1) = 0.5 - std::sin(a);
        if (labels) (*labels)[n_outer + k] = 1;
    }
    if (noise > 0.0)
        for (double& v : p.values()) v += noise * rng.normal();
    return p;
}

std::vector<Edge> knn_edges(const Matrix& points, std::size_t k) {
    const std::size_t n = points.rows();
    if (n < k + 1) {
        throw std::invalid_argument("knn_edges: need at least k + 1 points (n=" + std::to_string(n) +
                                    ", k=" + std::to_string(k) + ")");
    }
    std::vector<Edge> edges;
    edges.reserve(n * k);
    std::vector<std::pair<double, NodeId>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto pi = points.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            double d = 0.0;
            const auto pj = points.row(j);
            for (std::size_t c = 0; c < points.cols(); ++c) d += (pi[c] - pj[c]) * (pi[c] - pj[c]);
            dist[j] = {j == i ? std::numeric_limits<double>::infinity() : d, static_cast<NodeId>(j)};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        for (std::size_t r = 0; r < k; ++r)
            edges.push_back(canonical({static_cast<NodeId>(i), dist[r].second}));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

Graph gen_swiss_roll(std::size_t n, std::size_t k_neighbors, std::uint64_t seed, double noise) {
    const Matrix pts = swiss_roll_points(n, seed, noise);
    const auto edges = knn_edges(pts, k_neighbors);
    return Graph::from_edges(n, edges, Matrix::identity(n), std::nullopt, "swiss-roll");
}

Graph gen_two_moon(std::size_t n, std::size_t k_neighbors, double noise, std::uint64_t seed) {
    std::vector<int> labels;
    const Matrix pts = two_moon_points(n, noise, seed, &labels);
    const auto edges = knn_edges(pts, k_neighbors);
    return Graph::from_edges(n, edges, Matrix::identity(n), std::move(labels), "two-moon");
}

Graph gen_karate_club() {
    static constexpr Edge kEdges[] = {
        {0, 1},   {0, 2},   {0, 3},   {0, 4},   {0, 5},   {0, 6},   {0, 7},   {0, 8},   {0, 10},
        {0, 11},  {0, 12},  {0, 13},  {0, 17},  {0, 19},  {0, 21},  {0, 31},  {1, 2},   {1, 3},
        {1, 7},   {1, 13},  {1, 17},  {1, 19},  {1, 21},  {1, 30},  {2, 3},   {2, 7},   {2, 8},
        {2, 9},   {2, 13},  {2, 27},  {2, 28},  {2, 32},  {3, 7},   {3, 12},  {3, 13},  {4, 6},
        {4, 10},  {5, 6},   {5, 10},  {5, 16},  {6, 16},  {8, 30},  {8, 32},  {8, 33},  {9, 33},
        {13, 33}, {14, 32}, {14, 33}, {15, 32}, {15, 33}, {18, 32}, {18, 33}, {19, 33}, {20, 32},
        {20, 33}, {22, 32}, {22, 33}, {23, 25}, {23, 27}, {23, 29}, {23, 32}, {23, 33}, {24, 25},
        {24, 27}, {24, 31}, {25, 31}, {26, 29}, {26, 33}, {27, 33}, {28, 31}, {28, 33}, {29, 32},
        {29, 33}, {30, 32}, {30, 33}, {31, 32}, {31, 33}, {32, 33},
    };
    // four communities (modularity-based split commonly shipped with the graph)
    std::vector<int> labels = {1, 1, 1, 1, 3, 3, 3, 1, 0, 1, 3, 1, 1, 1, 0, 0, 3,
                               1, 0, 1, 0, 1, 0, 0, 2, 2, 0, 0, 2, 0, 0, 2, 0, 0};
    return Graph::from_edges(34, kEdges, Matrix::identity(34), std::move(labels), "karate");
}

Graph gen_erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
    Rng rng = Rng::derive(seed, "erdos-renyi");
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.bernoulli(p)) edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j)});
    return Graph::from_edges(n, edges, Matrix::identity(n), std::nullopt, "erdos-renyi");
}

}  // namespace bandana
