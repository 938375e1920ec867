#include "bandana/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <stdexcept>

namespace bandana {

namespace {

double squared_distance(const Matrix& x, std::size_t a, std::size_t b) {
    double d = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) {
        const double t = x(a, c) - x(b, c);
        d += t * t;
    }
    return d;
}

}  // namespace

double ego_dirichlet_energy(const Graph& graph, const Matrix& features, std::size_t node) {
    if (node >= graph.num_nodes()) throw std::out_of_range("ego_dirichlet_energy: node out of range");
    if (features.rows() != graph.num_nodes()) {
        throw std::invalid_argument("ego_dirichlet_energy: one feature row per node required");
    }
    double total = 0.0;
    for (NodeId j : graph.neighbors(node)) total += squared_distance(features, node, j);
    return total / static_cast<double>(graph.degree(node) + 1);
}

double global_dirichlet_energy(const Graph& graph, const Matrix& features) {
    if (features.rows() != graph.num_nodes()) {
        throw std::invalid_argument("global_dirichlet_energy: one feature row per node required");
    }
    // each undirected edge contributes to both endpoint ego graphs
    double total = 0.0;
    for (const Edge& e : graph.undirected_edges()) {
        const double d = squared_distance(features, e.u, e.v);
        total += d / static_cast<double>(graph.degree(e.u) + 1) + d / static_cast<double>(graph.degree(e.v) + 1);
    }
    return total;
}

EnergyTheoremReport verify_energy_theorem(std::size_t trials, std::span<const double> keep_probs, Rng& rng) {
    if (keep_probs.empty()) throw std::invalid_argument("verify_energy_theorem: no keep probabilities");
    EnergyTheoremReport rep;
    rep.trials = trials;
    for (std::size_t t = 0; t < trials; ++t) {
        const double keep = keep_probs[t % keep_probs.size()];
        const std::size_t leaves = 1 + rng.uniform_index(8);
        const std::size_t dim = 1 + rng.uniform_index(4);
        const std::size_t n = leaves + 1;
        Matrix x(n, dim);
        std::vector<double> leaf(dim);
        for (double& v : leaf) v = rng.normal();
        for (std::size_t c = 0; c < dim; ++c) {
            x(0, c) = rng.normal();
            for (std::size_t l = 1; l < n; ++l) x(l, c) = leaf[c];
        }
        std::vector<Edge> spokes, rim;
        for (std::size_t l = 1; l < n; ++l) spokes.push_back({0, static_cast<NodeId>(l)});
        for (std::size_t a = 1; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b)
                if (rng.bernoulli(0.3)) rim.push_back({static_cast<NodeId>(a), static_cast<NodeId>(b)});

        std::vector<Edge> all = spokes;
        all.insert(all.end(), rim.begin(), rim.end());
        const Graph ego = Graph::from_edges(n, all, x);
        std::vector<Edge> kept = rim;
        for (const Edge& e : spokes)
            if (rng.bernoulli(keep)) kept.push_back(e);
        const Graph masked = Graph::from_edges(n, kept, x);

        const double before = ego_dirichlet_energy(ego, x, 0);
        const double after = ego_dirichlet_energy(masked, x, 0);
        if (after > before) ++rep.violations;
        if (keep >= 1.0) {
            ++rep.equality_checks;
            rep.max_equality_gap = std::max(rep.max_equality_gap, std::abs(after - before));
        }
    }
    return rep;
}

std::vector<double> ego_entropies(const SparseMatrix& weights) {
    std::vector<double> out;
    for (std::size_t j = 0; j < weights.rows; ++j) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t s = weights.row_offsets[j]; s < weights.row_offsets[j + 1]; ++s) {
            if (weights.col_indices[s] == j) continue;
            if (weights.values[s] < 0.0) throw std::invalid_argument("ego_entropies: negative weight");
            sum += weights.values[s];
            ++count;
        }
        if (count < 2) continue;
        if (sum <= 0.0) throw std::invalid_argument("ego_entropies: all-zero weights at node " + std::to_string(j));
        double h = 0.0;
        for (std::size_t s = weights.row_offsets[j]; s < weights.row_offsets[j + 1]; ++s) {
            if (weights.col_indices[s] == j || weights.values[s] <= 0.0) continue;
            const double w = weights.values[s] / sum;
            h -= w * std::log(w);
        }
        out.push_back(h);
    }
    return out;
}

Histogram histogram(std::span<const double> values, std::size_t bins) {
    if (bins == 0) throw std::invalid_argument("histogram: need at least one bin");
    Histogram h;
    h.samples = values.size();
    h.counts.assign(bins, 0);
    double hi = 0.0;
    for (double v : values) hi = std::max(hi, v);
    if (hi <= 0.0) hi = 1.0;
    for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(hi * static_cast<double>(b) / static_cast<double>(bins));
    for (double v : values) {
        auto b = static_cast<std::size_t>(v / hi * static_cast<double>(bins));
        h.counts[std::min(b, bins - 1)]++;
    }
    if (!values.empty()) {
        std::vector<double> s(values.begin(), values.end());
        std::sort(s.begin(), s.end());
        const std::size_t m = s.size() / 2;
        h.median = s.size() % 2 ? s[m] : 0.5 * (s[m - 1] + s[m]);
    }
    return h;
}

namespace {

struct UnionFind {
    std::vector<std::size_t> parent, size;
    explicit UnionFind(std::size_t n) : parent(n), size(n, 1) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size[a] < size[b]) std::swap(a, b);
        parent[b] = a;
        size[a] += size[b];
    }
};

}  // namespace

Components count_components(const Graph& graph, const SparseMatrix* mask, double threshold) {
    const std::size_t n = graph.num_nodes();
    if (mask && (mask->rows != n || mask->nnz() != graph.num_directed_entries() + n)) {
        throw std::invalid_argument("count_components: mask pattern does not match the graph");
    }
    UnionFind uf(n);
    if (mask) {
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t s = mask->row_offsets[j]; s < mask->row_offsets[j + 1]; ++s)
                if (mask->col_indices[s] != j && mask->values[s] > threshold) uf.unite(j, mask->col_indices[s]);
    } else {
        for (const Edge& e : graph.undirected_edges()) uf.unite(e.u, e.v);
    }
    Components c;
    for (std::size_t i = 0; i < n; ++i) {
        if (uf.find(i) == i) {
            ++c.count;
            c.giant = std::max(c.giant, uf.size[i]);
        }
    }
    return c;
}

namespace {

std::vector<double> mat_vec(const Matrix& c, const std::vector<double>& v) {
    std::vector<double> out(c.rows(), 0.0);
    for (std::size_t r = 0; r < c.rows(); ++r)
        for (std::size_t k = 0; k < c.cols(); ++k) out[r] += c(r, k) * v[k];
    return out;
}

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Leading eigenvector of a PSD matrix, kept orthogonal to `against`.
std::vector<double> power_iteration(const Matrix& c, const std::vector<std::vector<double>>& against) {
    const std::size_t d = c.rows();
    Rng rng(0x5eed);
    std::vector<double> v(d);
    for (double& x : v) x = rng.normal();
    auto orthonormalize = [&](std::vector<double>& w) {
        for (const auto& a : against) {
            double dot = 0.0;
            for (std::size_t i = 0; i < d; ++i) dot += w[i] * a[i];
            for (std::size_t i = 0; i < d; ++i) w[i] -= dot * a[i];
        }
        const double nv = norm(w);
        if (nv == 0.0) return false;
        for (double& x : w) x /= nv;
        return true;
    };
    if (!orthonormalize(v)) return {};
    for (int it = 0; it < 5000; ++it) {
        std::vector<double> w = mat_vec(c, v);
        if (!orthonormalize(w)) return v;  // remaining spectrum is zero
        double delta = 0.0;
        for (std::size_t i = 0; i < d; ++i) delta = std::max(delta, std::abs(w[i] - v[i]));
        v = std::move(w);
        if (delta < 1e-12) break;
    }
    return v;
}

}  // namespace

Matrix pca2d(const Matrix& z) {
    const std::size_t n = z.rows(), d = z.cols();
    Matrix out(n, 2, 0.0);
    if (n == 0 || d == 0) return out;
    Matrix centred = z;
    for (std::size_t c = 0; c < d; ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += z(r, c);
        mean /= static_cast<double>(n);
        for (std::size_t r = 0; r < n; ++r) centred(r, c) -= mean;
    }
    Matrix cov(d, d, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t a = 0; a < d; ++a) {
            const double za = centred(r, a);
            if (za == 0.0) continue;
            for (std::size_t b = 0; b < d; ++b) cov(a, b) += za * centred(r, b);
        }
    bool any = false;
    for (double v : cov.values()) any = any || v != 0.0;
    if (!any) return out;

    std::vector<std::vector<double>> basis;
    for (std::size_t k = 0; k < std::min<std::size_t>(2, d); ++k) {
        auto v = power_iteration(cov, basis);
        if (v.empty()) break;
        basis.push_back(std::move(v));
    }
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t k = 0; k < basis.size(); ++k) {
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) s += centred(r, c) * basis[k][c];
            out(r, k) = s;
        }
    return out;
}

void export_embeddings(const Matrix& z, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path.string() + ": cannot write embeddings");
    out << "node";
    for (std::size_t c = 0; c < z.cols(); ++c) out << ",dim" << c;
    out << '\n' << std::setprecision(10);
    for (std::size_t r = 0; r < z.rows(); ++r) {
        out << r;
        for (std::size_t c = 0; c < z.cols(); ++c) out << ',' << z(r, c);
        out << '\n';
    }
}

}  // namespace bandana
