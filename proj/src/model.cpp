#include "bandana/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bandana {

std::vector<ModelParams::Entry> ModelParams::entries() {
    std::vector<Entry> out;
    for (std::size_t k = 0; k < encoder.size(); ++k) {
        const std::string p = "encoder." + std::to_string(k) + ".";
        auto& l = encoder[k];
        out.push_back({p + "weight", &l.weight, true, false});
        out.push_back({p + "bn.gamma", &l.gamma, true, false});
        out.push_back({p + "bn.beta", &l.beta, true, false});
        out.push_back({p + "bn.running_mean", &l.running.mean, false, false});
        out.push_back({p + "bn.running_var", &l.running.variance, false, false});
    }
    out.push_back({"decoder.w1", &decoder.w1, true, true});
    if (decoder.w1_hidden.size() > 0) out.push_back({"decoder.w1_hidden", &decoder.w1_hidden, true, true});
    out.push_back({"decoder.b1", &decoder.b1, true, true});
    out.push_back({"decoder.w2", &decoder.w2, true, true});
    out.push_back({"decoder.b2", &decoder.b2, true, true});
    return out;
}

std::vector<std::pair<std::string, const Matrix*>> ModelParams::entries() const {
    std::vector<std::pair<std::string, const Matrix*>> out;
    for (const auto& e : const_cast<ModelParams*>(this)->entries()) out.emplace_back(e.path, e.value);
    return out;
}

namespace {

Matrix glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_in, fan_out);
    for (double& v : w.values()) v = rng.uniform(-a, a);
    return w;
}

}  // namespace

ModelParams init_params(const ModelConfig& config, Rng& rng) {
    if (config.in_dim == 0 || config.hidden_dim == 0 || config.out_dim == 0 || config.num_layers == 0 ||
        config.decoder_hidden == 0) {
        throw std::invalid_argument("init_params: dimensions and layer count must be positive");
    }
    ModelParams p;
    p.config = config;
    for (std::size_t k = 0; k < config.num_layers; ++k) {
        EncoderLayer l;
        const std::size_t din = p.layer_in(k), dout = p.layer_out(k);
        l.weight = glorot(din, dout, rng);
        l.gamma = Matrix(1, dout, 1.0);
        l.beta = Matrix(1, dout, 0.0);
        l.running = BatchNormRunning(dout);
        p.encoder.push_back(std::move(l));
    }
    p.decoder.w1 = glorot(config.out_dim, config.decoder_hidden, rng);
    if (config.num_layers > 1 && config.hidden_dim != config.out_dim) {
        p.decoder.w1_hidden = glorot(config.hidden_dim, config.decoder_hidden, rng);
    }
    p.decoder.b1 = Matrix(1, config.decoder_hidden, 0.0);
    p.decoder.w2 = glorot(config.decoder_hidden, 1, rng);
    p.decoder.b2 = Matrix(1, 1, 0.0);
    return p;
}

SparseMatrix normalize_propagation(const SparseMatrix& adj) {
    for (Real v : adj.values)
        if (v < 0.0) throw std::invalid_argument("normalize_propagation: negative adjacency entry");
    const std::vector<Real> d_in = adj.row_sums();
    const std::vector<Real> d_out = adj.col_sums();
    SparseMatrix g = adj;
    for (std::size_t j = 0; j < g.rows; ++j) {
        for (std::size_t s = g.row_offsets[j]; s < g.row_offsets[j + 1]; ++s) {
            const Real denom = d_out[g.col_indices[s]] * d_in[j];
            g.values[s] = denom > 0.0 ? g.values[s] / std::sqrt(denom) : 0.0;
        }
    }
    return g;
}

BoundParams bind_params(Tape& tape, const ModelParams& params, bool trainable) {
    auto put = [&](const Matrix& m) { return trainable ? tape.parameter(m) : tape.constant_view(m); };
    BoundParams b;
    for (const auto& l : params.encoder) {
        b.weight.push_back(put(l.weight));
        b.gamma.push_back(put(l.gamma));
        b.beta.push_back(put(l.beta));
    }
    b.w1 = put(params.decoder.w1);
    if (params.decoder.w1_hidden.size() > 0) b.w1_hidden = put(params.decoder.w1_hidden);
    b.b1 = put(params.decoder.b1);
    b.w2 = put(params.decoder.w2);
    b.b2 = put(params.decoder.b2);
    return b;
}

std::vector<Var> encode(Tape& tape, const BoundParams& bound, ModelParams& params, Var x,
                        std::span<const SparseMatrix> propagation, bool train, Rng& dropout_rng) {
    (void)tape;
    const std::size_t K = params.config.num_layers;
    if (propagation.size() != 1 && propagation.size() < K) {
        throw std::invalid_argument("encode: need one propagation matrix or one per layer");
    }
    if (x.cols() != params.config.in_dim) {
        throw std::invalid_argument("encode: feature width " + std::to_string(x.cols()) +
                                    " does not match model input " + std::to_string(params.config.in_dim));
    }
    std::vector<Var> outs;
    outs.reserve(K);
    Var z = x;
    for (std::size_t k = 0; k < K; ++k) {
        const SparseMatrix& g = propagation.size() == 1 ? propagation[0] : propagation[k];
        if (g.rows != x.rows() || g.cols != x.rows()) {
            throw std::invalid_argument("encode: propagation matrix does not match node count");
        }
        Var h = dropout(z, params.config.encoder_dropout, dropout_rng, train);
        // multiply by W first when it narrows the width
        if (params.layer_out(k) <= params.layer_in(k)) {
            h = spmm(g, matmul(h, bound.weight[k]));
        } else {
            h = matmul(spmm(g, h), bound.weight[k]);
        }
        h = batch_norm(h, bound.gamma[k], bound.beta[k], params.encoder[k].running, train,
                       params.config.bn_momentum);
        z = elu(h);
        if (!z.value().all_finite()) throw std::runtime_error("encode: non-finite activation");
        outs.push_back(z);
    }
    return outs;
}

Var decode_edge_scores(const BoundParams& bound, const ModelConfig& config, Var z,
                       std::span<const Edge> edges, bool train, Rng& dropout_rng) {
    std::vector<std::size_t> us(edges.size()), vs(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (edges[e].u >= z.rows() || edges[e].v >= z.rows()) {
            throw std::out_of_range("decode_edge_scores: edge endpoint out of range");
        }
        us[e] = edges[e].u;
        vs[e] = edges[e].v;
    }
    Var w1 = bound.w1;
    if (z.cols() != w1.rows() && bound.w1_hidden.valid() && z.cols() == bound.w1_hidden.rows()) w1 = bound.w1_hidden;
    if (z.cols() != w1.rows()) {
        throw std::invalid_argument("decode_edge_scores: embedding width " + std::to_string(z.cols()) +
                                    " has no decoder input weight");
    }
    Var pair = hadamard(gather_rows(z, us), gather_rows(z, vs));
    Var h = elu(add_bias(matmul(pair, w1), bound.b1));
    h = dropout(h, config.decoder_dropout, dropout_rng, train);
    return sigmoid(add_bias(matmul(h, bound.w2), bound.b2));
}

std::vector<Matrix> embed_layers(const ModelParams& params, const Graph& graph) {
    Tape tape;
    ModelParams frozen = params;  // eval mode leaves running stats alone anyway
    const BoundParams b = bind_params(tape, frozen, false);
    const SparseMatrix g = normalize_propagation(graph.adjacency(true));
    Rng unused(0);
    const std::vector<Var> zs =
        encode(tape, b, frozen, tape.constant_view(graph.features()), std::span(&g, 1), false, unused);
    std::vector<Matrix> out;
    out.reserve(zs.size());
    for (const Var& z : zs) out.push_back(z.value());
    return out;
}

std::vector<Real> decode_eval(const ModelParams& params, const Matrix& z, std::span<const Edge> edges) {
    Tape tape;
    const BoundParams b = bind_params(tape, params, false);
    Rng unused(0);
    const Var s = decode_edge_scores(b, params.config, tape.constant_view(z), edges, false, unused);
    return s.value().values();
}

Matrix concat_columns(std::span<const Matrix> parts) {
    if (parts.empty()) return {};
    std::size_t cols = 0;
    for (const auto& p : parts) {
        if (p.rows() != parts[0].rows()) throw std::invalid_argument("concat_columns: row mismatch");
        cols += p.cols();
    }
    Matrix out(parts[0].rows(), cols);
    for (std::size_t r = 0; r < out.rows(); ++r) {
        std::size_t c0 = 0;
        for (const auto& p : parts) {
            for (std::size_t c = 0; c < p.cols(); ++c) out(r, c0 + c) = p(r, c);
            c0 += p.cols();
        }
    }
    return out;
}

}  // namespace bandana
