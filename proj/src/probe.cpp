#include "bandana/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "bandana/autograd.hpp"
#include "bandana/log.hpp"
#include "bandana/optim.hpp"
#include "bandana/rng.hpp"

namespace bandana {

std::vector<double> dot_scores(const Matrix& z, std::span<const Edge> edges) {
    std::vector<double> out;
    out.reserve(edges.size());
    for (const Edge& e : edges) {
        if (e.u >= z.rows() || e.v >= z.rows()) throw std::out_of_range("dot_scores: endpoint out of range");
        const auto a = z.row(e.u), b = z.row(e.v);
        double s = 0.0;
        for (std::size_t c = 0; c < a.size(); ++c) s += a[c] * b[c];
        out.push_back(s);
    }
    return out;
}

LinkMetrics dot_product_probe(const Matrix& z, std::span<const Edge> pos, std::span<const Edge> neg) {
    if (pos.empty() || neg.empty()) throw std::invalid_argument("dot_product_probe: empty edge set");
    const auto ps = dot_scores(z, pos), ns = dot_scores(z, neg);
    LinkMetrics m;
    m.auc = auc(ps, ns);
    m.ap = average_precision(ps, ns);
    for (std::size_t k : {10, 50, 100})
        if (k <= ns.size()) m.hits[k] = hits_at_k(ps, ns, k);
    return m;
}

NodeSplit node_split(std::size_t num_nodes, double train_frac, double val_frac, double label_ratio,
                     std::uint64_t seed) {
    if (!(train_frac > 0.0 && val_frac >= 0.0 && train_frac + val_frac < 1.0)) {
        throw std::invalid_argument("node_split: fractions must be positive and sum below 1");
    }
    if (!(label_ratio > 0.0 && label_ratio <= 1.0)) {
        throw std::invalid_argument("node_split: label ratio must lie in (0, 1]");
    }
    std::vector<std::size_t> order(num_nodes);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = Rng::derive(seed, "node-split");
    for (std::size_t i = num_nodes; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
    const auto n = static_cast<double>(num_nodes);
    const auto n_train = static_cast<std::size_t>(std::llround(train_frac * n));
    const auto n_val = static_cast<std::size_t>(std::llround(val_frac * n));
    NodeSplit s;
    s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                 order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
    // the train set is already in random order, so a prefix is a uniform subsample
    const auto keep = static_cast<std::size_t>(std::llround(label_ratio * static_cast<double>(s.train.size())));
    s.train.resize(keep);
    if (s.train.empty()) throw std::invalid_argument("node_split: no training nodes left");
    return s;
}

Matrix standardize_columns(const Matrix& z) {
    Matrix out = z;
    const std::size_t n = z.rows();
    if (n == 0) return out;
    for (std::size_t c = 0; c < z.cols(); ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += z(r, c);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t r = 0; r < n; ++r) var += (z(r, c) - mean) * (z(r, c) - mean);
        var /= static_cast<double>(n);
        const double inv = var > 1e-24 ? 1.0 / std::sqrt(var) : 0.0;
        for (std::size_t r = 0; r < n; ++r) out(r, c) = (z(r, c) - mean) * inv;
    }
    return out;
}

namespace {

std::vector<int> argmax_rows(const Matrix& logits, std::span<const std::size_t> rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) {
        const auto row = logits.row(r);
        out.push_back(static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
    }
    return out;
}

std::vector<int> pick(std::span<const int> labels, std::span<const std::size_t> rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) out.push_back(labels[r]);
    return out;
}

double accuracy_of(std::span<const int> pred, std::span<const int> truth) {
    if (truth.empty()) return 0.0;
    std::size_t ok = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) ok += pred[i] == truth[i];
    return static_cast<double>(ok) / static_cast<double>(truth.size());
}

}  // namespace

NodeMetrics linear_probe(const Matrix& z, std::span<const int> labels, const NodeSplit& split,
                         const LinearProbeConfig& config) {
    if (labels.size() != z.rows()) throw std::invalid_argument("linear_probe: one label per node required");
    if (split.train.empty() || split.test.empty()) throw std::invalid_argument("linear_probe: empty split");
    const std::size_t classes = static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
    {
        std::set<int> seen;
        for (std::size_t r : split.train) seen.insert(labels[r]);
        if (seen.size() < classes) {
            logging::warn("linear_probe: " + std::to_string(classes - seen.size()) +
                      " class(es) absent from the training nodes");
        }
    }
    Rng rng = Rng::derive(config.seed, "linear-probe");
    const double a = std::sqrt(6.0 / static_cast<double>(z.cols() + classes));
    Matrix w(z.cols(), classes), b(1, classes, 0.0);
    for (double& v : w.values()) v = rng.uniform(-a, a);

    AdamState state;
    const AdamConfig adam{config.lr};
    const std::vector<int> val_truth = pick(labels, split.val);
    const std::vector<int> test_truth = pick(labels, split.test);

    NodeMetrics best;
    double best_val = -1.0;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        Tape tape;
        Var x = tape.constant_view(z);
        Var wv = tape.parameter(w), bv = tape.parameter(b);
        Var logits = add_bias(matmul(x, wv), bv);
        Var loss = softmax_cross_entropy(logits, labels, split.train);
        tape.backward(loss);
        Matrix gw = wv.grad(), gb = bv.grad();
        Matrix* params[] = {&w, &b};
        const Matrix* grads[] = {&gw, &gb};
        const Real decay[] = {config.weight_decay, 0.0};
        adam_step(params, grads, decay, state, adam);

        const Matrix out = add_bias(matmul(tape.constant_view(z), tape.constant_view(w)), tape.constant_view(b)).value();
        const double val_acc = split.val.empty() ? 0.0 : accuracy_of(argmax_rows(out, split.val), val_truth);
        if (val_acc > best_val || split.val.empty()) {
            best_val = val_acc;
            const std::vector<int> pred = argmax_rows(out, split.test);
            const F1Scores f = micro_macro_f1(pred, test_truth);
            best.micro_f1 = f.micro;
            best.macro_f1 = f.macro;
            best.accuracy = accuracy_of(pred, test_truth);
            best.val_accuracy = val_acc;
            best.best_epoch = epoch;
        }
    }
    return best;
}

}  // namespace bandana
