#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "bandana/matrix.hpp"
#include "bandana/rng.hpp"
#include "bandana/sparse.hpp"

namespace bandana {

class Tape;

/// Handle to a value recorded on a Tape.
class Var {
public:
    Var() = default;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    bool valid() const { return tape_ != nullptr; }
    Tape& tape() const { return *tape_; }
    std::size_t id() const { return id_; }

    const Matrix& value() const;
    /// Accumulated gradient; an all-zero matrix when nothing flowed here.
    Matrix grad() const;
    bool requires_grad() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }

private:
    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Ordered record of primitive operations for reverse-mode differentiation.
///
/// Nodes are appended in evaluation order, so node ids are already a
/// topological order and `backward` is a single reverse sweep.
class Tape {
public:
    /// Called with the gradient of the node's output; accumulates into inputs.
    using BackwardFn = std::function<void(Tape&, const Matrix& out_grad)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Matrix value);
    /// Non-owning constant. `value` must outlive the tape.
    Var constant_view(const Matrix& value);
    Var parameter(Matrix value);

    /// Appends an op result. It requires grad iff any input does.
    Var record(Matrix value, std::initializer_list<Var> inputs, BackwardFn backward);

    /// Reverse sweep from a 1x1 loss. Each node is visited once.
    void backward(Var loss);

    const Matrix& value(std::size_t id) const;
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
    bool has_grad(std::size_t id) const { return !nodes_[id].grad.empty(); }
    const Matrix& grad(std::size_t id) const { return nodes_[id].grad; }
    /// Gradient buffer of `id`, zero-initialised on first use.
    Matrix& grad_accumulator(std::size_t id);

    std::size_t size() const { return nodes_.size(); }
    /// Nodes visited by the most recent backward call.
    std::size_t last_backward_visits() const { return last_visits_; }

private:
    struct Node {
        Matrix owned;
        const Matrix* view = nullptr;
        Matrix grad;
        bool requires_grad = false;
        BackwardFn backward;
    };
    std::vector<Node> nodes_;
    std::size_t last_visits_ = 0;
};

// ---------------------------------------------------------------------------
// Differentiable primitives. Inputs must live on the same tape.

Var matmul(Var a, Var b);
/// s·x with s fixed.
Var spmm(const SparseMatrix& s, Var x);
/// s·x where the nonzero values of s come from `values` (nnz x 1) and are
/// differentiated as well; only the pattern of `pattern` is used.
Var spmm_values(const SparseMatrix& pattern, Var values, Var x);
Var add(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, Real factor);
/// x (n x c) plus a broadcast row vector b (1 x c).
Var add_bias(Var x, Var b);
Var elu(Var x, Real alpha = 1.0);
Var sigmoid(Var x);
Var log(Var x);
Var sum(Var x);
Var mean(Var x);
/// Rows of x selected (with repetition) by `rows`.
Var gather_rows(Var x, std::span<const std::size_t> rows);
/// Inverted dropout: survivors scaled by 1/(1-rate) in train mode,
/// identity in eval mode or when rate == 0.
Var dropout(Var x, Real rate, Rng& rng, bool train);

/// Per-feature running statistics for batch normalization.
struct BatchNormRunning {
    Matrix mean;      // 1 x c
    Matrix variance;  // 1 x c
    explicit BatchNormRunning(std::size_t features = 0)
        : mean(1, features, 0.0), variance(1, features, 1.0) {}
};

/// Batch normalization over the row (node) dimension. Train mode uses batch
/// statistics and updates `running` with the given momentum; eval mode
/// normalizes with `running`.
Var batch_norm(Var x, Var gamma, Var beta, BatchNormRunning& running, bool train,
               Real momentum = 0.1, Real eps = 1e-5);

/// Mean binary cross-entropy -[t log r + (1-t) log(1-r)] of probabilities
/// `probs` (m x 1) against targets. Probabilities are clamped to
/// [1e-12, 1-1e-12]; `clamped` (optional) receives the number of clamped
/// entries. Returns a 1x1 zero for m == 0.
Var binary_cross_entropy(Var probs, std::span<const Real> targets, std::size_t* clamped = nullptr);

/// Mean softmax cross-entropy of `logits` rows listed in `rows` against
/// integer class labels.
Var softmax_cross_entropy(Var logits, std::span<const int> labels, std::span<const std::size_t> rows);

// ---------------------------------------------------------------------------

/// Numerically stable softmax inside contiguous groups
/// [offsets[g], offsets[g+1]) with temperature tau. Every group must be
/// non-empty and tau positive.
std::vector<Real> grouped_softmax(std::span<const Real> scores, std::span<const std::size_t> offsets,
                                  Real temperature);

}  // namespace bandana
