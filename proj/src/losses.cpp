#include "bandana/losses.hpp"

#include <stdexcept>

#include "bandana/log.hpp"

namespace bandana {

namespace {

void warn_clamped(std::size_t n) {
    if (n > 0) logging::warn("loss: " + std::to_string(n) + " score(s) clamped away from 0/1");
}

}  // namespace

Var bandwidth_loss(Var pos_scores, std::span<const Real> pos_targets, Var neg_scores) {
    for (Real t : pos_targets)
        if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("bandwidth_loss: target outside [0, 1]");
    std::size_t c1 = 0, c2 = 0;
    Var pos = binary_cross_entropy(pos_scores, pos_targets, &c1);
    const std::vector<Real> zeros(neg_scores.rows(), 0.0);
    Var neg = binary_cross_entropy(neg_scores, zeros, &c2);
    warn_clamped(c1 + c2);
    return add(pos, neg);
}

Var discrete_ce_loss(Var masked_pos_scores, Var neg_scores) {
    const std::vector<Real> ones(masked_pos_scores.rows(), 1.0);
    const std::vector<Real> zeros(neg_scores.rows(), 0.0);
    std::size_t c1 = 0, c2 = 0;
    Var pos = binary_cross_entropy(masked_pos_scores, ones, &c1);
    Var neg = binary_cross_entropy(neg_scores, zeros, &c2);
    warn_clamped(c1 + c2);
    return add(pos, neg);
}

std::string to_string(LayerwiseMode mode) {
    switch (mode) {
        case LayerwiseMode::lwp: return "lwp";
        case LayerwiseMode::lwm: return "lwm";
        case LayerwiseMode::last: return "last";
    }
    return "?";
}

std::optional<LayerwiseMode> parse_layerwise_mode(std::string_view name) {
    if (name == "lwp") return LayerwiseMode::lwp;
    if (name == "lwm") return LayerwiseMode::lwm;
    if (name == "last") return LayerwiseMode::last;
    return std::nullopt;
}

EdgeBatch make_edge_batch(std::vector<Edge> pos, std::vector<Edge> neg) {
    EdgeBatch b;
    b.pos = std::move(pos);
    b.neg = std::move(neg);
    b.dir.resize(2 * b.pos.size());
    for (std::size_t q = 0; q < b.pos.size(); ++q) b.dir[2 * q] = b.dir[2 * q + 1] = q;
    return b;
}

Var layer_bandwidth_loss(const BoundParams& bound, const ModelConfig& config, Var z,
                         std::span<const Real> targets, const EdgeBatch& batch, bool train, Rng& rng) {
    if (targets.size() != batch.dir.size()) {
        throw std::invalid_argument("layer_bandwidth_loss: one target per directed positive required");
    }
    Var pos = gather_rows(decode_edge_scores(bound, config, z, batch.pos, train, rng), batch.dir);
    Var neg = decode_edge_scores(bound, config, z, batch.neg, train, rng);
    return bandwidth_loss(pos, targets, neg);
}

Var layerwise_loss(const BoundParams& bound, const ModelConfig& config, std::span<const Var> per_layer_z,
                   std::span<const std::vector<Real>> per_layer_targets, const EdgeBatch& batch,
                   LayerwiseMode mode, bool train, Rng& rng) {
    if (per_layer_z.empty() || per_layer_targets.empty()) {
        throw std::invalid_argument("layerwise_loss: no layers");
    }
    if (mode != LayerwiseMode::lwp) {
        return layer_bandwidth_loss(bound, config, per_layer_z.back(), per_layer_targets.back(), batch, train,
                                    rng);
    }
    if (per_layer_targets.size() != per_layer_z.size()) {
        throw std::invalid_argument("layerwise_loss: " + std::to_string(per_layer_targets.size()) +
                                    " target sets for " + std::to_string(per_layer_z.size()) + " layers");
    }
    Var total;
    for (std::size_t k = 0; k < per_layer_z.size(); ++k) {
        Var l = layer_bandwidth_loss(bound, config, per_layer_z[k], per_layer_targets[k], batch, train, rng);
        total = total.valid() ? add(total, l) : l;
    }
    return scale(total, 1.0 / static_cast<Real>(per_layer_z.size()));
}

}  // namespace bandana
