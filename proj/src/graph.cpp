#include "bandana/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace bandana {

Graph Graph::from_edges(std::size_t num_nodes, std::span<const Edge> edges, Matrix features,
                        std::optional<std::vector<int>> labels, std::string name,
                        BuildReport* report) {
    if (features.rows() != num_nodes) {
        throw std::invalid_argument("Graph: feature matrix has " + std::to_string(features.rows()) +
                                    " rows for " + std::to_string(num_nodes) + " nodes");
    }
    if (labels && labels->size() != num_nodes) {
        throw std::invalid_argument("Graph: label count does not match node count");
    }
    BuildReport rep;
    std::vector<Edge> directed;
    directed.reserve(edges.size() * 2);
    for (const Edge& e : edges) {
        if (e.u >= num_nodes || e.v >= num_nodes) {
            throw std::invalid_argument("Graph: edge (" + std::to_string(e.u) + ", " +
                                        std::to_string(e.v) + ") out of range for " +
                                        std::to_string(num_nodes) + " nodes");
        }
        if (e.u == e.v) {
            ++rep.self_loops_dropped;
            continue;
        }
        directed.push_back(e);
        directed.push_back({e.v, e.u});
    }
    std::sort(directed.begin(), directed.end());
    const std::size_t before = directed.size();
    directed.erase(std::unique(directed.begin(), directed.end()), directed.end());
    rep.duplicates_merged = (before - directed.size()) / 2;

    Graph g;
    g.num_nodes_ = num_nodes;
    g.row_offsets_.assign(num_nodes + 1, 0);
    g.col_indices_.reserve(directed.size());
    for (const Edge& e : directed) {
        ++g.row_offsets_[e.u + 1];
        g.col_indices_.push_back(e.v);
    }
    for (std::size_t i = 0; i < num_nodes; ++i) g.row_offsets_[i + 1] += g.row_offsets_[i];
    g.features_ = std::move(features);
    g.labels_ = std::move(labels);
    g.name_ = std::move(name);
    if (report) *report = rep;
    return g;
}

bool Graph::has_edge(std::size_t i, std::size_t j) const {
    const auto nb = neighbors(i);
    return std::binary_search(nb.begin(), nb.end(), static_cast<NodeId>(j));
}

std::size_t Graph::num_classes() const {
    if (!labels_ || labels_->empty()) return 0;
    return static_cast<std::size_t>(*std::max_element(labels_->begin(), labels_->end())) + 1;
}

std::vector<Edge> Graph::undirected_edges() const {
    std::vector<Edge> out;
    out.reserve(num_edges());
    for (std::size_t i = 0; i < num_nodes_; ++i)
        for (NodeId j : neighbors(i))
            if (i < j) out.push_back({static_cast<NodeId>(i), j});
    return out;
}

SparseMatrix Graph::adjacency(bool with_self_loops) const {
    SparseMatrix s;
    s.rows = s.cols = num_nodes_;
    s.row_offsets.assign(num_nodes_ + 1, 0);
    s.col_indices.reserve(col_indices_.size() + (with_self_loops ? num_nodes_ : 0));
    for (std::size_t i = 0; i < num_nodes_; ++i) {
        bool diag_done = !with_self_loops;
        for (NodeId j : neighbors(i)) {
            if (!diag_done && j > i) {
                s.col_indices.push_back(static_cast<Index>(i));
                diag_done = true;
            }
            s.col_indices.push_back(j);
        }
        if (!diag_done) s.col_indices.push_back(static_cast<Index>(i));
        s.row_offsets[i + 1] = s.col_indices.size();
    }
    s.values.assign(s.col_indices.size(), 1.0);
    return s;
}

Graph Graph::with_edges(std::span<const Edge> edges) const {
    return from_edges(num_nodes_, edges, features_, labels_, name_);
}

Graph Graph::with_features(Matrix features) const {
    if (features.rows() != num_nodes_) {
        throw std::invalid_argument("Graph::with_features: row count must equal node count");
    }
    Graph g = *this;
    g.features_ = std::move(features);
    return g;
}

Graph Graph::with_name(std::string name) const {
    Graph g = *this;
    g.name_ = std::move(name);
    return g;
}

void Graph::validate() const {
    if (row_offsets_.size() != num_nodes_ + 1 || row_offsets_.back() != col_indices_.size()) {
        throw std::logic_error("Graph: malformed row offsets");
    }
    if (features_.rows() != num_nodes_) throw std::logic_error("Graph: feature row count");
    if (labels_ && labels_->size() != num_nodes_) throw std::logic_error("Graph: label count");
    for (std::size_t i = 0; i < num_nodes_; ++i) {
        const auto nb = neighbors(i);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            if (nb[k] >= num_nodes_) throw std::logic_error("Graph: neighbor out of range");
            if (nb[k] == i) throw std::logic_error("Graph: self-loop stored");
            if (k > 0 && nb[k] <= nb[k - 1]) throw std::logic_error("Graph: neighbors unsorted");
            if (!has_edge(nb[k], i)) throw std::logic_error("Graph: adjacency not symmetric");
        }
    }
}

double Graph::density() const {
    if (num_nodes_ < 2) return 0.0;
    const double n = static_cast<double>(num_nodes_);
    return static_cast<double>(num_directed_entries()) / (n * (n - 1.0));
}

Graph identity_features(const Graph& graph) {
    return graph.with_features(Matrix::identity(graph.num_nodes()));
}

}  // namespace bandana
