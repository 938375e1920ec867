#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bandana/matrix.hpp"
#include "bandana/sparse.hpp"

namespace bandana {

using NodeId = Index;

/// Node pair. Undirected edge lists hold canonical pairs with u < v.
struct Edge {
    NodeId u = 0;
    NodeId v = 0;
    auto operator<=>(const Edge&) const = default;
};

inline Edge canonical(Edge e) { return e.u <= e.v ? e : Edge{e.v, e.u}; }

/// Immutable undirected graph: symmetric CSR adjacency without self-loops,
/// dense node features and optional integer labels.
class Graph {
public:
    struct BuildReport {
        std::size_t self_loops_dropped = 0;
        std::size_t duplicates_merged = 0;
    };

    Graph() = default;

    /// Symmetrizes and deduplicates `edges`, dropping self-loops.
    /// Throws std::invalid_argument for out-of-range endpoints, a feature
    /// matrix without num_nodes rows, or a label vector of the wrong length.
    static Graph from_edges(std::size_t num_nodes, std::span<const Edge> edges, Matrix features,
                            std::optional<std::vector<int>> labels = std::nullopt,
                            std::string name = "graph", BuildReport* report = nullptr);

    std::size_t num_nodes() const { return num_nodes_; }
    /// Stored directed entries (twice the undirected edge count).
    std::size_t num_directed_entries() const { return col_indices_.size(); }
    std::size_t num_edges() const { return col_indices_.size() / 2; }
    std::size_t degree(std::size_t i) const { return row_offsets_[i + 1] - row_offsets_[i]; }
    std::span<const NodeId> neighbors(std::size_t i) const {
        return {col_indices_.data() + row_offsets_[i], degree(i)};
    }
    bool has_edge(std::size_t i, std::size_t j) const;

    const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
    const std::vector<NodeId>& col_indices() const { return col_indices_; }

    const Matrix& features() const { return features_; }
    std::size_t feature_dim() const { return features_.cols(); }
    const std::optional<std::vector<int>>& labels() const { return labels_; }
    /// max label + 1, or 0 without labels.
    std::size_t num_classes() const;
    const std::string& name() const { return name_; }

    /// Canonical (u < v) pairs in lexicographic order.
    std::vector<Edge> undirected_edges() const;
    /// Unit-weighted adjacency, optionally with the diagonal added.
    SparseMatrix adjacency(bool with_self_loops) const;
    /// Same nodes, features and labels; edge set replaced.
    Graph with_edges(std::span<const Edge> edges) const;
    Graph with_features(Matrix features) const;
    Graph with_name(std::string name) const;

    /// Checks every structural invariant; throws std::logic_error on failure.
    void validate() const;

    /// |E| / (n (n - 1)) with |E| counted as directed entries.
    double density() const;

private:
    std::size_t num_nodes_ = 0;
    std::vector<std::size_t> row_offsets_{0};
    std::vector<NodeId> col_indices_;
    Matrix features_;
    std::optional<std::vector<int>> labels_;
    std::string name_;
};

/// Replaces the features with the n x n identity.
Graph identity_features(const Graph& graph);

}  // namespace bandana
