#pragma once

#include <span>
#include <string>
#include <vector>

#include "bandana/autograd.hpp"
#include "bandana/graph.hpp"
#include "bandana/rng.hpp"
#include "bandana/sparse.hpp"

namespace bandana {

struct ModelConfig {
    std::size_t in_dim = 0;
    std::size_t hidden_dim = 256;
    std::size_t out_dim = 256;
    std::size_t num_layers = 2;
    std::size_t decoder_hidden = 64;
    double encoder_dropout = 0.5;
    double decoder_dropout = 0.0;
    double bn_momentum = 0.1;
};

struct EncoderLayer {
    Matrix weight;  // d_in x d_out
    Matrix gamma;   // 1 x d_out
    Matrix beta;    // 1 x d_out
    BatchNormRunning running;
};

/// Shared 2-layer MLP applied to z_i * z_j.
struct Decoder {
    Matrix w1;         // d_out x decoder_hidden
    Matrix w1_hidden;  // hidden_dim x decoder_hidden, for intermediate layers; empty when widths agree
    Matrix b1;  // 1 x decoder_hidden
    Matrix w2;  // decoder_hidden x 1
    Matrix b2;  // 1 x 1
};

struct ModelParams {
    ModelConfig config;
    std::vector<EncoderLayer> encoder;
    Decoder decoder;

    struct Entry {
        std::string path;
        Matrix* value;
        bool trainable;
        bool in_decoder;
    };
    /// Every stored tensor keyed by a stable path such as "encoder.1.weight"
    /// or "decoder.b2". Running batch-norm statistics are not trainable.
    std::vector<Entry> entries();
    std::vector<std::pair<std::string, const Matrix*>> entries() const;

    /// Input and output width of encoder layer k.
    std::size_t layer_in(std::size_t k) const { return k == 0 ? config.in_dim : config.hidden_dim; }
    std::size_t layer_out(std::size_t k) const {
        return k + 1 == config.num_layers ? config.out_dim : config.hidden_dim;
    }
};

/// Glorot-uniform weights, zero biases, gamma = 1, beta = 0.
ModelParams init_params(const ModelConfig& config, Rng& rng);

/// D_out^{-1/2} A D_in^{-1/2} for a target-major weighted adjacency, where
/// D_in holds per-target (row) sums and D_out per-source (column) sums.
/// Rows or columns with zero sum map to zero. Throws on negative entries.
SparseMatrix normalize_propagation(const SparseMatrix& adj);

/// Parameter tensors placed on a tape.
struct BoundParams {
    std::vector<Var> weight, gamma, beta;
    Var w1, w1_hidden, b1, w2, b2;
};

/// Places parameters on `tape`: as differentiable parameters when
/// `trainable`, as constants otherwise.
BoundParams bind_params(Tape& tape, const ModelParams& params, bool trainable);

/// GCN encoder. Layer k computes ELU(BN(G_k · dropout(Z_{k-1}) · W_k)).
/// `propagation` holds either one normalized matrix per layer or a single
/// matrix shared by every layer. Returns the K layer outputs. In train mode
/// the running statistics in `params` are updated.
std::vector<Var> encode(Tape& tape, const BoundParams& bound, ModelParams& params, Var x,
                        std::span<const SparseMatrix> propagation, bool train, Rng& dropout_rng);

/// Edge probabilities (m x 1): sigmoid(W2 · dropout(ELU(W1 (z_u * z_v) + b1)) + b2).
/// Embeddings of hidden width use the hidden-width first-layer weight.
Var decode_edge_scores(const BoundParams& bound, const ModelConfig& config, Var z,
                       std::span<const Edge> edges, bool train, Rng& dropout_rng);

/// Eval-mode encoder outputs on the unmasked graph (normalized A + I).
std::vector<Matrix> embed_layers(const ModelParams& params, const Graph& graph);

/// Eval-mode decoder probabilities for the given edges.
std::vector<Real> decode_eval(const ModelParams& params, const Matrix& z, std::span<const Edge> edges);

/// Column-wise concatenation of matrices with equal row counts.
Matrix concat_columns(std::span<const Matrix> parts);

}  // namespace bandana
