#include "suites.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "bandana/autograd.hpp"
#include "bandana/losses.hpp"
#include "bandana/masking.hpp"
#include "bandana/metrics.hpp"
#include "bandana/model.hpp"
#include "bandana/sparse.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

namespace oracle {

using namespace bandana;

double GradientReport::overall() const {
    double w = 0.0;
    for (const auto& [name, e] : worst) w = std::max(w, e);
    return w;
}

namespace {

std::size_t dim(Rng& rng, std::size_t lo = 1, std::size_t hi = 8) { return lo + rng.uniform_index(hi - lo + 1); }

Matrix probs(std::size_t r, std::size_t c, Rng& rng) {
    Matrix m(r, c);
    for (double& x : m.values()) x = rng.uniform(0.05, 0.95);
    return m;
}

Matrix positive(std::size_t r, std::size_t c, Rng& rng) {
    Matrix m(r, c);
    for (double& x : m.values()) x = rng.uniform(0.3, 3.0);
    return m;
}

// random sparse pattern with roughly half the entries present
SparseMatrix random_sparse(std::size_t r, std::size_t c, Rng& rng) {
    Matrix d(r, c);
    for (double& x : d.values())
        if (rng.bernoulli(0.5)) x = rng.normal();
    return SparseMatrix::from_dense(d);
}

// scalar readout with non-uniform weights so every output entry matters
Var readout(Var y, const Matrix& w) { return sum(hadamard(y, y.tape().constant(w))); }

struct Case {
    std::vector<Matrix> inputs;
    Builder f;
};

using Generator = std::function<Case(Rng&)>;

std::vector<std::pair<std::string, Generator>> generators() {
    std::vector<std::pair<std::string, Generator>> g;
    g.emplace_back("matmul", [](Rng& rng) {
        const std::size_t r = dim(rng), k = dim(rng), c = dim(rng);
        const Matrix w = random_matrix(r, c, rng);
        return Case{{random_matrix(r, k, rng), random_matrix(k, c, rng)},
                    [w](Tape&, std::span<const Var> v) { return readout(matmul(v[0], v[1]), w); }};
    });
    g.emplace_back("spmm", [](Rng& rng) {
        const std::size_t r = dim(rng), k = dim(rng), c = dim(rng);
        const SparseMatrix s = random_sparse(r, k, rng);
        const Matrix w = random_matrix(r, c, rng);
        return Case{{random_matrix(k, c, rng)},
                    [s, w](Tape&, std::span<const Var> v) { return readout(spmm(s, v[0]), w); }};
    });
    g.emplace_back("spmm_values", [](Rng& rng) {
        const std::size_t r = dim(rng), k = dim(rng), c = dim(rng);
        SparseMatrix s = random_sparse(r, k, rng);
        if (s.nnz() == 0) s = SparseMatrix::from_dense(Matrix(r, k, 1.0));
        const Matrix w = random_matrix(r, c, rng);
        return Case{{random_matrix(s.nnz(), 1, rng), random_matrix(k, c, rng)},
                    [s, w](Tape&, std::span<const Var> v) { return readout(spmm_values(s, v[0], v[1]), w); }};
    });
    g.emplace_back("add", [](Rng& rng) {
        const std::size_t r = dim(rng), c = dim(rng);
        const Matrix w = random_matrix(r, c, rng);
        return Case{{random_matrix(r, c, rng), random_matrix(r, c, rng)},
                    [w](Tape&, std::span<const Var> v) { return readout(add(v[0], v[1]), w); }};
    });
    g.emplace_back("hadamard", [](Rng& rng) {
        const std::size_t r = dim(rng), c = dim(rng);
        const Matrix w = random_matrix(r, c, rng);
        return Case{{random_matrix(r, c, rng), random_matrix(r, c, rng)},
                    [w](Tape&, std::span<const Var> v) { return readout(hadamard(v[0], v[1]), w); }};
    });
    g.emplace_back("scale", [](Rng& rng) {
        const std::size_t r = dim(rng), c = dim(rng);
        const Matrix w = random_matrix(r, c, rng);
        const double f = rng.normal();
        return Case{{random_matrix(r, c, rng)},
                    [w, f](Tape&, std::span<const Var> v) { return readout(scale(v[0], f), w); }};
    });
    g.emplace_back("add_bias", [](Rng& rng) {
        const std::size_t r = dim(rng), c = dim(rng);
        const Matrix w = random_matrix(r, c, rng);
        return Case{{random_matrix(r, c, rng), random_matrix(1, c, rng)},
                    [w](Tape&, std::span<const Var> v) { return readout(add_bias(v[0], v[1]), w); }};
    });
    g.emplace_back("elu", [](Rng& rng) {
        const std::size_t r = dim(rng), c = dim(rng);
        const Matrix w = random_matrix(r, c, rng);
        return Case{{random_matrix(r, c, rng)}, [w](Tape&, std::span<const Var> v) { return readout(elu(v[0]), w); }};
    });
    g.emplace_back("sigmoid", [](Rng& rng) {
        const std::size_t r = dim(rng), c = dim(rng);
        const Matrix w = random_matrix(r, c, rng);
        return Case{{random_matrix(r, c, rng, 2.0)},
                    [w](Tape&, std::span<const Var> v) { return readout(sigmoid(v[0]), w); }};
    });
    g.emplace_back("log", [](Rng& rng) {
        const std::size_t r = dim(rng), c = dim(rng);
        const Matrix w = random_matrix(r, c, rng);
        return Case{{positive(r, c, rng)}, [w](Tape&, std::span<const Var> v) { return readout(log(v[0]), w); }};
    });
    g.emplace_back("sum", [](Rng& rng) {
        const std::size_t r = dim(rng), c = dim(rng);
        const Matrix w = random_matrix(r, c, rng);
        return Case{{random_matrix(r, c, rng)},
                    [w](Tape& t, std::span<const Var> v) { return sum(hadamard(v[0], t.constant(w))); }};
    });
    g.emplace_back("mean", [](Rng& rng) {
        const std::size_t r = dim(rng), c = dim(rng);
        const Matrix w = random_matrix(r, c, rng);
        return Case{{random_matrix(r, c, rng)},
                    [w](Tape& t, std::span<const Var> v) { return mean(hadamard(v[0], t.constant(w))); }};
    });
    g.emplace_back("gather_rows", [](Rng& rng) {
        const std::size_t r = dim(rng), c = dim(rng), m = dim(rng);
        std::vector<std::size_t> rows(m);
        for (auto& x : rows) x = rng.uniform_index(r);
        const Matrix w = random_matrix(m, c, rng);
        return Case{{random_matrix(r, c, rng)},
                    [rows, w](Tape&, std::span<const Var> v) { return readout(gather_rows(v[0], rows), w); }};
    });
    g.emplace_back("dropout", [](Rng& rng) {
        const std::size_t r = dim(rng), c = dim(rng);
        const Matrix w = random_matrix(r, c, rng);
        const std::uint64_t seed = rng.next_u64();
        const double rate = rng.uniform(0.0, 0.9);
        return Case{{random_matrix(r, c, rng)}, [w, seed, rate](Tape&, std::span<const Var> v) {
                        Rng d(seed);
                        return readout(dropout(v[0], rate, d, true), w);
                    }};
    });
    g.emplace_back("batch_norm_train", [](Rng& rng) {
        const std::size_t r = dim(rng, 3), c = dim(rng);
        const Matrix w = random_matrix(r, c, rng);
        return Case{{random_matrix(r, c, rng), random_matrix(1, c, rng), random_matrix(1, c, rng)},
                    [w, c](Tape&, std::span<const Var> v) {
                        BatchNormRunning running(c);
                        return readout(batch_norm(v[0], v[1], v[2], running, true), w);
                    }};
    });
    g.emplace_back("batch_norm_eval", [](Rng& rng) {
        const std::size_t r = dim(rng), c = dim(rng);
        const Matrix w = random_matrix(r, c, rng);
        BatchNormRunning stats(c);
        for (std::size_t j = 0; j < c; ++j) {
            stats.mean[j] = rng.normal();
            stats.variance[j] = rng.uniform(0.2, 3.0);
        }
        return Case{{random_matrix(r, c, rng), random_matrix(1, c, rng), random_matrix(1, c, rng)},
                    [w, stats](Tape&, std::span<const Var> v) {
                        BatchNormRunning running = stats;
                        return readout(batch_norm(v[0], v[1], v[2], running, false), w);
                    }};
    });
    g.emplace_back("binary_cross_entropy", [](Rng& rng) {
        const std::size_t m = dim(rng);
        std::vector<Real> t(m);
        for (auto& x : t) x = rng.uniform();
        return Case{{probs(m, 1, rng)},
                    [t](Tape&, std::span<const Var> v) { return binary_cross_entropy(v[0], t); }};
    });
    g.emplace_back("softmax_cross_entropy", [](Rng& rng) {
        const std::size_t r = dim(rng), c = dim(rng, 2);
        std::vector<int> labels(r);
        for (auto& l : labels) l = static_cast<int>(rng.uniform_index(c));
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < r; ++i)
            if (rng.bernoulli(0.7) || rows.empty()) rows.push_back(i);
        return Case{{random_matrix(r, c, rng, 2.0)}, [labels, rows](Tape&, std::span<const Var> v) {
                        return softmax_cross_entropy(v[0], labels, rows);
                    }};
    });
    g.emplace_back("bandwidth_loss", [](Rng& rng) {
        const std::size_t p = dim(rng), n = dim(rng);
        std::vector<Real> t(p);
        for (auto& x : t) x = rng.uniform();
        return Case{{probs(p, 1, rng), probs(n, 1, rng)},
                    [t](Tape&, std::span<const Var> v) { return bandwidth_loss(v[0], t, v[1]); }};
    });
    g.emplace_back("discrete_ce_loss", [](Rng& rng) {
        const std::size_t p = dim(rng), n = dim(rng);
        return Case{{probs(p, 1, rng), probs(n, 1, rng)},
                    [](Tape&, std::span<const Var> v) { return discrete_ce_loss(v[0], v[1]); }};
    });
    return g;
}

}  // namespace

GradientReport gradient_suite(std::size_t instances_per_op, std::uint64_t seed) {
    GradientReport report;
    report.instances = instances_per_op;
    for (const auto& [name, gen] : generators()) {
        Rng rng = Rng::derive(seed, name);
        double worst = 0.0;
        for (std::size_t i = 0; i < instances_per_op; ++i) {
            const Case c = gen(rng);
            worst = std::max(worst, gradient_error(c.inputs, c.f));
        }
        report.worst[name] = worst;
    }
    return report;
}

SimplexReport simplex_suite(std::size_t graphs, std::uint64_t seed) {
    SimplexReport rep;
    Rng rng = Rng::derive(seed, "simplex-suite");
    for (std::size_t gi = 0; gi < graphs; ++gi) {
        const std::size_t n = 10 + rng.uniform_index(60);
        const Graph g = random_graph(n, rng.uniform(0.02, 0.3), rng, 1);
        const double tau = std::exp(rng.uniform(std::log(0.05), std::log(20.0)));
        const MaskSet ms = sample_bandwidth_masks(g, tau, 3, rng);
        for (const SparseMatrix& layer : ms.layers) {
            const auto sums = layer.row_sums();
            for (std::size_t j = 0; j < n; ++j) {
                rep.worst_row_sum_error = std::max(rep.worst_row_sum_error, std::abs(sums[j] - 1.0));
                ++rep.rows_checked;
            }
            for (double v : layer.values) {
                rep.min_entry = std::min(rep.min_entry, v);
                rep.max_entry = std::max(rep.max_entry, v);
            }
        }
        const MaskSet cold = sample_bandwidth_masks(g, 1e-6, 1, rng);
        const MaskSet hot = sample_bandwidth_masks(g, 1e6, 1, rng);
        for (std::size_t j = 0; j < n; ++j) {
            const auto cv = cold.layers[0].row_values(j);
            rep.cold_min_row_max = std::min(rep.cold_min_row_max, *std::max_element(cv.begin(), cv.end()));
            const auto cols = hot.layers[0].row_cols(j);
            const auto hv = hot.layers[0].row_values(j);
            const std::size_t deg = g.degree(j);
            for (std::size_t s = 0; s < cols.size(); ++s) {
                // group = in-neighbours, or the lone diagonal slot of an isolated node
                double expect;
                if (deg == 0) expect = 1.0;
                else expect = cols[s] == j ? 0.0 : 1.0 / static_cast<double>(deg);
                rep.hot_max_deviation = std::max(rep.hot_max_deviation, std::abs(hv[s] - expect));
            }
        }
    }
    return rep;
}

OracleReport oracle_suite(std::size_t ranking_inputs, std::size_t sparse_graphs, std::uint64_t seed) {
    OracleReport rep;
    Rng rng = Rng::derive(seed, "oracle-suite");
    for (std::size_t t = 0; t < ranking_inputs; ++t) {
        const std::size_t np = 1 + rng.uniform_index(500), nn = 1 + rng.uniform_index(500);
        // coarse grid so ties are common
        const double grid = rng.bernoulli(0.5) ? 20.0 : 1e6;
        std::vector<double> pos(np), neg(nn);
        for (auto& x : pos) x = std::floor(grid * rng.uniform(0.1, 1.0)) / grid;
        for (auto& x : neg) x = std::floor(grid * rng.uniform(0.0, 0.9)) / grid;
        ++rep.ranking_inputs;
        rep.auc_mismatches += bandana::auc(pos, neg) != oracle::auc(pos, neg);
        rep.ap_mismatches += bandana::average_precision(pos, neg) != oracle::average_precision(pos, neg);
        const std::size_t k = 1 + rng.uniform_index(nn);
        rep.hits_mismatches += bandana::hits_at_k(pos, neg, k) != oracle::hits_at_k(pos, neg, k);
    }
    for (std::size_t t = 0; t < sparse_graphs; ++t) {
        const Graph g = random_graph(20, rng.uniform(0.05, 0.5), rng, 1);
        ++rep.sparse_graphs;
        // weighted asymmetric A + I
        SparseMatrix w = self_looped_pattern(g);
        for (double& v : w.values) v = rng.uniform(0.0, 1.0);
        const Matrix x = random_matrix(20, 1 + rng.uniform_index(8), rng);
        rep.spmm_max_error = std::max(rep.spmm_max_error, max_abs_diff(bandana::spmm(w, x), matmul(w.to_dense(), x)));
        rep.normalize_max_error = std::max(
            rep.normalize_max_error, max_abs_diff(normalize_propagation(w).to_dense(), normalize_dense(w.to_dense())));
        // symmetric 0/1 masks reduce to GCN on the surviving subgraph
        const MaskSet b = sample_bernoulli_masks(g, 0.5, 1, rng);
        const SparseMatrix tilde = perturbed_adjacency(g, b.layers[0]);
        Matrix surviving = tilde.to_dense();
        for (std::size_t i = 0; i < 20; ++i) surviving(i, i) = 0.0;
        rep.gcn_reduction_max_error = std::max(
            rep.gcn_reduction_max_error, max_abs_diff(normalize_propagation(tilde).to_dense(), gcn_matrix(surviving)));
    }
    return rep;
}

}  // namespace oracle
