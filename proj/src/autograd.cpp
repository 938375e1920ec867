#include "bandana/autograd.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bandana {

namespace {

void require_same_tape(Var a, Var b, const char* op) {
    if (!a.valid() || !b.valid() || &a.tape() != &b.tape()) {
        throw std::invalid_argument(std::string(op) + ": operands must live on the same tape");
    }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Var / Tape

const Matrix& Var::value() const { return tape_->value(id_); }

Matrix Var::grad() const {
    if (tape_->has_grad(id_)) return tape_->grad(id_);
    const Matrix& v = value();
    return Matrix(v.rows(), v.cols());
}

bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::constant(Matrix value) {
    Node n;
    n.owned = std::move(value);
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

Var Tape::constant_view(const Matrix& value) {
    Node n;
    n.view = &value;
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

Var Tape::parameter(Matrix value) {
    Node n;
    n.owned = std::move(value);
    n.requires_grad = true;
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, BackwardFn backward) {
    Node n;
    n.owned = std::move(value);
    for (Var in : inputs) {
        assert(&in.tape() == this && in.id() < nodes_.size());
        n.requires_grad = n.requires_grad || nodes_[in.id()].requires_grad;
    }
    if (n.requires_grad) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

const Matrix& Tape::value(std::size_t id) const {
    const Node& n = nodes_[id];
    return n.view ? *n.view : n.owned;
}

Matrix& Tape::grad_accumulator(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.empty()) {
        const Matrix& v = value(id);
        n.grad = Matrix(v.rows(), v.cols());
    }
    return n.grad;
}

void Tape::backward(Var loss) {
    if (&loss.tape() != this) {
        throw std::invalid_argument("Tape::backward: loss recorded on another tape");
    }
    const Matrix& lv = value(loss.id());
    if (lv.rows() != 1 || lv.cols() != 1) {
        throw std::invalid_argument("Tape::backward: loss must be a 1x1 scalar");
    }
    for (Node& n : nodes_) n.grad = Matrix();
    last_visits_ = 0;
    if (!nodes_[loss.id()].requires_grad) return;
    grad_accumulator(loss.id())[0] = 1.0;
    for (std::size_t id = loss.id() + 1; id-- > 0;) {
        Node& n = nodes_[id];
        if (!n.requires_grad || n.grad.empty()) continue;
        ++last_visits_;
        if (n.backward) {
            // Inputs have smaller ids, so this node's gradient is final here
            // and is not touched while its inputs accumulate.
            n.backward(*this, n.grad);
        }
    }
}

// ---------------------------------------------------------------------------
// Primitives

Var matmul(Var a, Var b) {
    require_same_tape(a, b, "matmul");
    Matrix out = bandana::matmul(a.value(), b.value());
    return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
        const Matrix& av = a.value();
        const Matrix& bv = b.value();
        const std::size_t n = bv.cols();
        if (a.requires_grad()) {
            // dA = g · Bᵀ
            Matrix& ga = t.grad_accumulator(a.id());
            for (std::size_t i = 0; i < av.rows(); ++i) {
                const Real* gi = g.data() + i * n;
                for (std::size_t k = 0; k < av.cols(); ++k) {
                    const Real* bk = bv.data() + k * n;
                    Real s = 0.0;
                    for (std::size_t j = 0; j < n; ++j) s += gi[j] * bk[j];
                    ga(i, k) += s;
                }
            }
        }
        if (b.requires_grad()) {
            // dB = Aᵀ · g, skipping zero entries of A.
            Matrix& gb = t.grad_accumulator(b.id());
            for (std::size_t i = 0; i < av.rows(); ++i) {
                const Real* gi = g.data() + i * n;
                const Real* ai = av.data() + i * av.cols();
                for (std::size_t k = 0; k < av.cols(); ++k) {
                    const Real s = ai[k];
                    if (s == 0.0) continue;
                    Real* dst = gb.data() + k * n;
                    for (std::size_t j = 0; j < n; ++j) dst[j] += s * gi[j];
                }
            }
        }
    });
}

namespace {

// Adds sᵀ·g into dx.
void spmm_transpose_accumulate(const SparseMatrix& s, const Matrix& g, Matrix& dx) {
    const std::size_t n = g.cols();
    for (std::size_t r = 0; r < s.rows; ++r) {
        const Real* gr = g.data() + r * n;
        for (std::size_t k = s.row_offsets[r]; k < s.row_offsets[r + 1]; ++k) {
            const Real v = s.values[k];
            Real* dst = dx.data() + static_cast<std::size_t>(s.col_indices[k]) * n;
            for (std::size_t j = 0; j < n; ++j) dst[j] += v * gr[j];
        }
    }
}

}  // namespace

Var spmm(const SparseMatrix& s, Var x) {
    Matrix out = bandana::spmm(s, x.value());
    auto held = std::make_shared<const SparseMatrix>(s);
    return x.tape().record(std::move(out), {x}, [held, x](Tape& t, const Matrix& g) {
        spmm_transpose_accumulate(*held, g, t.grad_accumulator(x.id()));
    });
}

Var spmm_values(const SparseMatrix& pattern, Var values, Var x) {
    require_same_tape(values, x, "spmm_values");
    if (values.value().rows() != pattern.nnz() || values.value().cols() != 1) {
        throw std::invalid_argument("spmm_values: values must be nnz x 1");
    }
    auto held = std::make_shared<SparseMatrix>(pattern);
    held->values = values.value().values();
    Matrix out = bandana::spmm(*held, x.value());
    return x.tape().record(std::move(out), {values, x}, [held, values, x](Tape& t, const Matrix& g) {
        if (x.requires_grad()) spmm_transpose_accumulate(*held, g, t.grad_accumulator(x.id()));
        if (values.requires_grad()) {
            Matrix& gv = t.grad_accumulator(values.id());
            const Matrix& xv = x.value();
            const std::size_t n = xv.cols();
            for (std::size_t r = 0; r < held->rows; ++r) {
                const Real* gr = g.data() + r * n;
                for (std::size_t k = held->row_offsets[r]; k < held->row_offsets[r + 1]; ++k) {
                    const Real* xc = xv.data() + static_cast<std::size_t>(held->col_indices[k]) * n;
                    Real s = 0.0;
                    for (std::size_t j = 0; j < n; ++j) s += gr[j] * xc[j];
                    gv[k] += s;
                }
            }
        }
    });
}

Var add(Var a, Var b) {
    require_same_tape(a, b, "add");
    require_same_shape(a.value(), b.value(), "add");
    Matrix out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
    return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
        for (Var v : {a, b}) {
            if (!v.requires_grad()) continue;
            Matrix& gv = t.grad_accumulator(v.id());
            for (std::size_t i = 0; i < g.size(); ++i) gv[i] += g[i];
        }
    });
}

Var hadamard(Var a, Var b) {
    require_same_tape(a, b, "hadamard");
    require_same_shape(a.value(), b.value(), "hadamard");
    Matrix out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
    return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
        if (a.requires_grad()) {
            Matrix& ga = t.grad_accumulator(a.id());
            const Matrix& bv = b.value();
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
        }
        if (b.requires_grad()) {
            Matrix& gb = t.grad_accumulator(b.id());
            const Matrix& av = a.value();
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
        }
    });
}

Var scale(Var a, Real factor) {
    Matrix out = a.value();
    for (Real& v : out.values()) v *= factor;
    return a.tape().record(std::move(out), {a}, [a, factor](Tape& t, const Matrix& g) {
        Matrix& ga = t.grad_accumulator(a.id());
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
    });
}

Var add_bias(Var x, Var b) {
    require_same_tape(x, b, "add_bias");
    const Matrix& xv = x.value();
    const Matrix& bv = b.value();
    if (bv.rows() != 1 || bv.cols() != xv.cols()) {
        throw std::invalid_argument("add_bias: bias must be 1 x cols");
    }
    Matrix out = xv;
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += bv[c];
    return x.tape().record(std::move(out), {x, b}, [x, b](Tape& t, const Matrix& g) {
        if (x.requires_grad()) {
            Matrix& gx = t.grad_accumulator(x.id());
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
        }
        if (b.requires_grad()) {
            Matrix& gb = t.grad_accumulator(b.id());
            for (std::size_t r = 0; r < g.rows(); ++r)
                for (std::size_t c = 0; c < g.cols(); ++c) gb[c] += g(r, c);
        }
    });
}

Var elu(Var x, Real alpha) {
    Matrix out = x.value();
    for (Real& v : out.values()) v = v > 0.0 ? v : alpha * std::expm1(v);
    return x.tape().record(std::move(out), {x}, [x, alpha](Tape& t, const Matrix& g) {
        Matrix& gx = t.grad_accumulator(x.id());
        const Matrix& xv = x.value();
        for (std::size_t i = 0; i < g.size(); ++i)
            gx[i] += g[i] * (xv[i] > 0.0 ? 1.0 : alpha * std::exp(xv[i]));
    });
}

Var sigmoid(Var x) {
    Matrix out = x.value();
    for (Real& v : out.values()) {
        v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    }
    auto y = std::make_shared<const Matrix>(out);
    return x.tape().record(std::move(out), {x}, [x, y](Tape& t, const Matrix& g) {
        Matrix& gx = t.grad_accumulator(x.id());
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (*y)[i] * (1.0 - (*y)[i]);
    });
}

Var log(Var x) {
    Matrix out = x.value();
    for (Real& v : out.values()) v = std::log(v);
    return x.tape().record(std::move(out), {x}, [x](Tape& t, const Matrix& g) {
        Matrix& gx = t.grad_accumulator(x.id());
        const Matrix& xv = x.value();
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] / xv[i];
    });
}

Var sum(Var x) {
    Real s = 0.0;
    for (Real v : x.value().values()) s += v;
    return x.tape().record(Matrix(1, 1, s), {x}, [x](Tape& t, const Matrix& g) {
        Matrix& gx = t.grad_accumulator(x.id());
        for (Real& v : gx.values()) v += g[0];
    });
}

Var mean(Var x) {
    const std::size_t n = x.value().size();
    if (n == 0) throw std::invalid_argument("mean: empty input");
    return scale(sum(x), 1.0 / static_cast<Real>(n));
}

Var gather_rows(Var x, std::span<const std::size_t> rows) {
    const Matrix& xv = x.value();
    const std::size_t c = xv.cols();
    Matrix out(rows.size(), c);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= xv.rows()) throw std::out_of_range("gather_rows: row index out of range");
        std::copy_n(xv.data() + rows[i] * c, c, out.data() + i * c);
    }
    auto idx = std::make_shared<const std::vector<std::size_t>>(rows.begin(), rows.end());
    return x.tape().record(std::move(out), {x}, [x, idx, c](Tape& t, const Matrix& g) {
        Matrix& gx = t.grad_accumulator(x.id());
        for (std::size_t i = 0; i < idx->size(); ++i) {
            Real* dst = gx.data() + (*idx)[i] * c;
            const Real* src = g.data() + i * c;
            for (std::size_t j = 0; j < c; ++j) dst[j] += src[j];
        }
    });
}

Var dropout(Var x, Real rate, Rng& rng, bool train) {
    if (!(rate >= 0.0 && rate < 1.0)) {
        throw std::invalid_argument("dropout: rate must lie in [0, 1)");
    }
    if (!train || rate == 0.0) return x;
    const Real keep = 1.0 - rate;
    const Real inv = 1.0 / keep;
    const Matrix& xv = x.value();
    Matrix out(xv.rows(), xv.cols());
    auto mask = std::make_shared<std::vector<Real>>(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) {
        const Real m = rng.uniform() < keep ? inv : 0.0;
        (*mask)[i] = m;
        out[i] = xv[i] * m;
    }
    return x.tape().record(std::move(out), {x}, [x, mask](Tape& t, const Matrix& g) {
        Matrix& gx = t.grad_accumulator(x.id());
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (*mask)[i];
    });
}

Var batch_norm(Var x, Var gamma, Var beta, BatchNormRunning& running, bool train, Real momentum,
               Real eps) {
    require_same_tape(x, gamma, "batch_norm");
    require_same_tape(x, beta, "batch_norm");
    const Matrix& xv = x.value();
    const std::size_t n = xv.rows();
    const std::size_t c = xv.cols();
    if (gamma.value().cols() != c || beta.value().cols() != c || running.mean.cols() != c) {
        throw std::invalid_argument("batch_norm: parameter width does not match input");
    }
    std::vector<Real> mu(c, 0.0), var(c, 0.0);
    if (train) {
        if (n < 2) throw std::invalid_argument("batch_norm: train mode needs at least two rows");
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t j = 0; j < c; ++j) mu[j] += xv(r, j);
        for (Real& m : mu) m /= static_cast<Real>(n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t j = 0; j < c; ++j) {
                const Real d = xv(r, j) - mu[j];
                var[j] += d * d;
            }
        for (std::size_t j = 0; j < c; ++j) {
            const Real biased = var[j] / static_cast<Real>(n);
            const Real unbiased = var[j] / static_cast<Real>(n - 1);
            running.mean[j] = (1.0 - momentum) * running.mean[j] + momentum * mu[j];
            running.variance[j] = (1.0 - momentum) * running.variance[j] + momentum * unbiased;
            var[j] = biased;
        }
    } else {
        for (std::size_t j = 0; j < c; ++j) {
            mu[j] = running.mean[j];
            var[j] = running.variance[j];
        }
    }
    auto inv_std = std::make_shared<std::vector<Real>>(c);
    for (std::size_t j = 0; j < c; ++j) (*inv_std)[j] = 1.0 / std::sqrt(var[j] + eps);
    auto xhat = std::make_shared<Matrix>(n, c);
    Matrix out(n, c);
    const Matrix& gv = gamma.value();
    const Matrix& bv = beta.value();
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t j = 0; j < c; ++j) {
            const Real h = (xv(r, j) - mu[j]) * (*inv_std)[j];
            (*xhat)(r, j) = h;
            out(r, j) = gv[j] * h + bv[j];
        }
    return x.tape().record(std::move(out), {x, gamma, beta},
                           [x, gamma, beta, xhat, inv_std, train](Tape& t, const Matrix& g) {
        const std::size_t n = g.rows();
        const std::size_t c = g.cols();
        const Matrix& gam = gamma.value();
        if (gamma.requires_grad()) {
            Matrix& gg = t.grad_accumulator(gamma.id());
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t j = 0; j < c; ++j) gg[j] += g(r, j) * (*xhat)(r, j);
        }
        if (beta.requires_grad()) {
            Matrix& gb = t.grad_accumulator(beta.id());
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t j = 0; j < c; ++j) gb[j] += g(r, j);
        }
        if (!x.requires_grad()) return;
        Matrix& gx = t.grad_accumulator(x.id());
        if (!train) {
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t j = 0; j < c; ++j) gx(r, j) += g(r, j) * gam[j] * (*inv_std)[j];
            return;
        }
        std::vector<Real> sum_d(c, 0.0), sum_dh(c, 0.0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t j = 0; j < c; ++j) {
                const Real d = g(r, j) * gam[j];
                sum_d[j] += d;
                sum_dh[j] += d * (*xhat)(r, j);
            }
        const Real inv_n = 1.0 / static_cast<Real>(n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t j = 0; j < c; ++j) {
                const Real d = g(r, j) * gam[j];
                gx(r, j) += (*inv_std)[j] * inv_n *
                            (static_cast<Real>(n) * d - sum_d[j] - (*xhat)(r, j) * sum_dh[j]);
            }
    });
}

namespace {
constexpr Real kProbLo = 1e-12;
constexpr Real kProbHi = 1.0 - 1e-12;
}  // namespace

Var binary_cross_entropy(Var probs, std::span<const Real> targets, std::size_t* clamped) {
    const Matrix& p = probs.value();
    if (p.cols() != 1 || p.rows() != targets.size()) {
        throw std::invalid_argument("binary_cross_entropy: probs must be m x 1 with m targets");
    }
    const std::size_t m = targets.size();
    std::size_t n_clamped = 0;
    Real total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        Real r = p[i];
        if (r < kProbLo || r > kProbHi) {
            ++n_clamped;
            r = std::clamp(r, kProbLo, kProbHi);
        }
        const Real tgt = targets[i];
        total -= tgt * std::log(r) + (1.0 - tgt) * std::log(1.0 - r);
    }
    if (clamped) *clamped = n_clamped;
    const Real loss = m == 0 ? 0.0 : total / static_cast<Real>(m);
    auto tg = std::make_shared<const std::vector<Real>>(targets.begin(), targets.end());
    return probs.tape().record(Matrix(1, 1, loss), {probs}, [probs, tg](Tape& t, const Matrix& g) {
        const std::size_t m = tg->size();
        if (m == 0) return;
        Matrix& gp = t.grad_accumulator(probs.id());
        const Matrix& p = probs.value();
        const Real w = g[0] / static_cast<Real>(m);
        for (std::size_t i = 0; i < m; ++i) {
            const Real r = std::clamp(p[i], kProbLo, kProbHi);
            gp[i] += w * (-(*tg)[i] / r + (1.0 - (*tg)[i]) / (1.0 - r));
        }
    });
}

Var softmax_cross_entropy(Var logits, std::span<const int> labels, std::span<const std::size_t> rows) {
    const Matrix& z = logits.value();
    if (labels.size() != z.rows()) {
        throw std::invalid_argument("softmax_cross_entropy: one label per logit row required");
    }
    if (rows.empty()) throw std::invalid_argument("softmax_cross_entropy: no rows selected");
    const std::size_t c = z.cols();
    auto probs = std::make_shared<Matrix>(rows.size(), c);
    Real total = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t r = rows[i];
        const int y = labels[r];
        if (y < 0 || static_cast<std::size_t>(y) >= c) {
            throw std::out_of_range("softmax_cross_entropy: label outside logit width");
        }
        Real mx = z(r, 0);
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, z(r, j));
        Real denom = 0.0;
        for (std::size_t j = 0; j < c; ++j) denom += std::exp(z(r, j) - mx);
        for (std::size_t j = 0; j < c; ++j) (*probs)(i, j) = std::exp(z(r, j) - mx) / denom;
        total -= z(r, static_cast<std::size_t>(y)) - mx - std::log(denom);
    }
    auto sel = std::make_shared<const std::vector<std::size_t>>(rows.begin(), rows.end());
    auto lab = std::make_shared<const std::vector<int>>(labels.begin(), labels.end());
    const Real loss = total / static_cast<Real>(rows.size());
    return logits.tape().record(Matrix(1, 1, loss), {logits},
                                [logits, probs, sel, lab](Tape& t, const Matrix& g) {
        Matrix& gz = t.grad_accumulator(logits.id());
        const std::size_t c = probs->cols();
        const Real w = g[0] / static_cast<Real>(sel->size());
        for (std::size_t i = 0; i < sel->size(); ++i) {
            const std::size_t r = (*sel)[i];
            for (std::size_t j = 0; j < c; ++j) {
                const Real onehot = static_cast<std::size_t>((*lab)[r]) == j ? 1.0 : 0.0;
                gz(r, j) += w * ((*probs)(i, j) - onehot);
            }
        }
    });
}

std::vector<Real> grouped_softmax(std::span<const Real> scores, std::span<const std::size_t> offsets,
                                  Real temperature) {
    if (!(temperature > 0.0)) {
        throw std::invalid_argument("grouped_softmax: temperature must be positive");
    }
    if (offsets.empty() || offsets.front() != 0 || offsets.back() != scores.size()) {
        throw std::invalid_argument("grouped_softmax: offsets must span the scores");
    }
    std::vector<Real> out(scores.size());
    for (std::size_t g = 0; g + 1 < offsets.size(); ++g) {
        const std::size_t lo = offsets[g];
        const std::size_t hi = offsets[g + 1];
        if (hi <= lo) throw std::invalid_argument("grouped_softmax: empty group");
        Real mx = scores[lo] / temperature;
        for (std::size_t k = lo + 1; k < hi; ++k) mx = std::max(mx, scores[k] / temperature);
        Real denom = 0.0;
        for (std::size_t k = lo; k < hi; ++k) {
            out[k] = std::exp(scores[k] / temperature - mx);
            denom += out[k];
        }
        for (std::size_t k = lo; k < hi; ++k) out[k] /= denom;
    }
    return out;
}

}  // namespace bandana
