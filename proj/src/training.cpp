#include "bandana/training.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>

#include "bandana/log.hpp"
#include "bandana/optim.hpp"
#include "bandana/probe.hpp"

namespace bandana {

void TrainConfig::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("train config: " + msg); };
    if (num_layers < 1 || num_layers > 8) fail("layers must be in [1, 8]");
    if (hidden_dim == 0 || out_dim == 0 || decoder_hidden == 0) fail("dimensions must be positive");
    if (!(lr > 0.0)) fail("learning rate must be positive");
    if (!(encoder_dropout >= 0.0 && encoder_dropout < 1.0)) fail("encoder dropout must be in [0, 1)");
    if (!(decoder_dropout >= 0.0 && decoder_dropout < 1.0)) fail("decoder dropout must be in [0, 1)");
    if (!(weight_decay >= 0.0)) fail("weight decay must be non-negative");
    if (patience < 1) fail("patience must be at least 1");
    if (!(neg_per_pos > 0.0)) fail("neg_per_pos must be positive");
    if (!(bn_momentum > 0.0 && bn_momentum <= 1.0)) fail("batch-norm momentum must be in (0, 1]");
    switch (mask_kind) {
        case MaskKind::bandwidth:
            if (!(temperature > 0.0)) fail("temperature must be positive");
            break;
        case MaskKind::bernoulli:
            if (!(mask_ratio >= 0.0 && mask_ratio <= 1.0)) fail("mask ratio must be in [0, 1]");
            break;
        case MaskKind::uniform:
        case MaskKind::truncgauss:
            if (!(mask_ratio > 0.5 && mask_ratio < 1.0)) fail("mask ratio must be in (0.5, 1)");
            break;
    }
}

ModelConfig TrainConfig::model_config(std::size_t in_dim) const {
    ModelConfig m;
    m.in_dim = in_dim;
    m.hidden_dim = hidden_dim;
    m.out_dim = out_dim;
    m.num_layers = num_layers;
    m.decoder_hidden = decoder_hidden;
    m.encoder_dropout = encoder_dropout;
    m.decoder_dropout = decoder_dropout;
    m.bn_momentum = bn_momentum;
    return m;
}

Matrix link_embeddings(const ModelParams& params, const Graph& graph) {
    return embed_layers(params, graph).back();
}

Matrix node_embeddings(const ModelParams& params, const Graph& graph) {
    const auto layers = embed_layers(params, graph);
    return concat_columns(layers);
}

namespace {

std::size_t scaled_count(double factor, std::size_t n) {
    return static_cast<std::size_t>(std::llround(factor * static_cast<double>(n)));
}

// Shared epoch loop: `step` builds the loss on a fresh tape.
template <typename Step>
TrainResult run_training(const Graph& graph, const EdgeSplit& split, const TrainConfig& config, Step step) {
    config.validate();
    if (split.train_pos.empty()) throw std::invalid_argument("pretrain: no training edges");
    const Graph tg = train_graph(graph, split);
    Rng init = Rng::derive(config.seed, "init");
    TrainResult res;
    res.params = init_params(config.model_config(graph.feature_dim()), init);
    if (config.max_epochs == 0) {
        res.history.stop_reason = "no_epochs";
        return res;
    }
    const bool can_validate = !split.val_pos.empty() && !split.val_neg.empty();

    AdamState state;
    const AdamConfig adam{config.lr};
    ModelParams best = res.params;
    double best_val = -std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    res.history.stop_reason = "max_epochs";

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        Tape tape;
        const BoundParams b = bind_params(tape, res.params, true);
        double loss_value = std::numeric_limits<double>::quiet_NaN();
        try {
            Var loss = step(tape, b, res.params, tg);
            loss_value = loss.value()[0];
            if (!std::isfinite(loss_value)) throw std::runtime_error("non-finite loss");
            tape.backward(loss);

            std::vector<Matrix*> params;
            std::vector<Matrix> grads;
            std::vector<Real> decay;
            for (std::size_t k = 0; k < res.params.encoder.size(); ++k) {
                auto& l = res.params.encoder[k];
                for (auto [p, v] : {std::pair{&l.weight, b.weight[k]}, std::pair{&l.gamma, b.gamma[k]},
                                    std::pair{&l.beta, b.beta[k]}}) {
                    params.push_back(p);
                    grads.push_back(v.grad());
                    decay.push_back(config.weight_decay);
                }
            }
            auto& d = res.params.decoder;
            for (auto [p, v] : {std::pair{&d.w1, b.w1}, std::pair{&d.b1, b.b1}, std::pair{&d.w2, b.w2},
                                std::pair{&d.b2, b.b2}}) {
                params.push_back(p);
                grads.push_back(v.grad());
                decay.push_back(0.0);
            }
            if (b.w1_hidden.valid()) {
                params.push_back(&d.w1_hidden);
                grads.push_back(b.w1_hidden.grad());
                decay.push_back(0.0);
            }
            std::vector<const Matrix*> grad_ptrs;
            for (const auto& g : grads) grad_ptrs.push_back(&g);
            adam_step(params, grad_ptrs, decay, state, adam);
        } catch (const std::runtime_error& e) {
            logging::warn("pretrain: epoch " + std::to_string(epoch) + " diverged: " + e.what());
            res.history.epochs.push_back({epoch, loss_value, std::numeric_limits<double>::quiet_NaN()});
            res.history.stop_reason = "diverged";
            break;
        }

        double val = 0.0;
        if (can_validate) {
            val = dot_product_probe(link_embeddings(res.params, tg), split.val_pos, split.val_neg).auc;
        }
        res.history.epochs.push_back({epoch, loss_value, val});
        logging::debug("epoch " + std::to_string(epoch) + " loss " + std::to_string(loss_value) + " val_auc " +
                   std::to_string(val));
        if (val > best_val) {
            best_val = val;
            best = res.params;
            res.history.best_epoch = epoch;
            res.history.best_val_auc = val;
            since_best = 0;
        } else if (++since_best >= config.patience) {
            res.history.stop_reason = "patience";
            break;
        }
    }
    if (res.history.best_epoch > 0) res.params = std::move(best);
    return res;
}

}  // namespace

TrainResult pretrain(const Graph& graph, const EdgeSplit& split, const TrainConfig& config) {
    if (config.mask_kind == MaskKind::bernoulli) return pretrain_discrete_baseline(graph, split, config);

    Rng mask_rng = Rng::derive(config.seed, "masks");
    Rng drop_rng = Rng::derive(config.seed, "dropout");
    Rng neg_rng = Rng::derive(config.seed, "negatives");
    const std::size_t n_masks = config.layerwise == LayerwiseMode::last ? 1 : config.num_layers;
    const double param = config.mask_kind == MaskKind::bandwidth ? config.temperature : config.mask_ratio;

    // slot of u->v and v->u for each training edge; the pattern is fixed
    std::vector<std::size_t> fwd, bwd;
    bool slots_ready = false;

    auto step = [&](Tape& tape, const BoundParams& b, ModelParams& params, const Graph& tg) {
        if (!slots_ready) {
            const SparseMatrix pattern = tg.adjacency(true);
            for (const Edge& e : split.train_pos) {
                fwd.push_back(pattern.find(e.v, e.u));
                bwd.push_back(pattern.find(e.u, e.v));
            }
            slots_ready = true;
        }
        const MaskSet masks = sample_masks(config.mask_kind, tg, param, n_masks, mask_rng);
        std::vector<SparseMatrix> props;
        std::vector<std::vector<Real>> targets;
        for (const auto& layer : masks.layers) {
            props.push_back(normalize_propagation(perturbed_adjacency(tg, layer)));
            std::vector<Real> t(2 * fwd.size());
            for (std::size_t q = 0; q < fwd.size(); ++q) {
                t[2 * q] = layer.values[fwd[q]];
                t[2 * q + 1] = layer.values[bwd[q]];
            }
            targets.push_back(std::move(t));
        }
        auto negs = sample_negative_edges(tg, scaled_count(config.neg_per_pos, split.train_pos.size()), {},
                                          neg_rng);
        const EdgeBatch batch = make_edge_batch(split.train_pos, std::move(negs));
        const auto zs = encode(tape, b, params, tape.constant_view(tg.features()), props, true, drop_rng);
        return layerwise_loss(b, params.config, zs, targets, batch, config.layerwise, true, drop_rng);
    };
    return run_training(graph, split, config, step);
}

TrainResult pretrain_discrete_baseline(const Graph& graph, const EdgeSplit& split, const TrainConfig& config) {
    if (config.mask_ratio <= 0.0) {
        throw std::invalid_argument("discrete baseline: mask ratio 0 masks no edge, nothing to reconstruct");
    }
    Rng mask_rng = Rng::derive(config.seed, "masks");
    Rng drop_rng = Rng::derive(config.seed, "dropout");
    Rng neg_rng = Rng::derive(config.seed, "negatives");
    std::vector<std::size_t> fwd;

    auto step = [&](Tape& tape, const BoundParams& b, ModelParams& params, const Graph& tg) {
        if (fwd.empty()) {
            const SparseMatrix pattern = tg.adjacency(true);
            for (const Edge& e : split.train_pos) fwd.push_back(pattern.find(e.v, e.u));
        }
        const MaskSet masks = sample_bernoulli_masks(tg, config.mask_ratio, 1, mask_rng);
        const SparseMatrix& m = masks.layers[0];
        std::vector<Edge> masked;
        for (std::size_t q = 0; q < fwd.size(); ++q)
            if (m.values[fwd[q]] == 0.0) masked.push_back(split.train_pos[q]);
        const SparseMatrix prop = normalize_propagation(perturbed_adjacency(tg, m));
        const auto negs = sample_negative_edges(tg, scaled_count(config.neg_per_pos, masked.size()), {}, neg_rng);
        const auto zs =
            encode(tape, b, params, tape.constant_view(tg.features()), std::span(&prop, 1), true, drop_rng);
        Var pos = decode_edge_scores(b, params.config, zs.back(), masked, true, drop_rng);
        Var neg = decode_edge_scores(b, params.config, zs.back(), negs, true, drop_rng);
        return discrete_ce_loss(pos, neg);
    };
    return run_training(graph, split, config, step);
}

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path.string() + ": cannot write history");
    out << "epoch,loss,val_auc\n" << std::setprecision(10);
    for (const auto& e : history.epochs) out << e.epoch << ',' << e.loss << ',' << e.val_auc << '\n';
}

}  // namespace bandana
