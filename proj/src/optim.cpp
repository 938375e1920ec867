#include "bandana/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace bandana {

void adam_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads,
               std::span<const Real> weight_decay, AdamState& state, const AdamConfig& config) {
    if (params.size() != grads.size() || params.size() != weight_decay.size()) {
        throw std::invalid_argument("adam_step: params, grads and weight decays differ in count");
    }
    if (state.step < 0) throw std::invalid_argument("adam_step: negative step counter");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i]->same_shape(*grads[i])) {
            throw std::invalid_argument("adam_step: gradient shape differs from parameter");
        }
        if (!grads[i]->all_finite()) {
            throw std::runtime_error("adam_step: non-finite gradient, step aborted");
        }
    }
    if (state.slots.empty()) {
        for (Matrix* p : params) {
            state.slots.push_back({Matrix(p->rows(), p->cols()), Matrix(p->rows(), p->cols())});
        }
    }
    if (state.slots.size() != params.size()) {
        throw std::invalid_argument("adam_step: optimizer state does not match parameters");
    }

    ++state.step;
    const Real t = static_cast<Real>(state.step);
    const Real bc1 = 1.0 - std::pow(config.beta1, t);
    const Real bc2 = 1.0 - std::pow(config.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Matrix& p = *params[i];
        const Matrix& g = *grads[i];
        AdamSlot& s = state.slots[i];
        if (!s.m.same_shape(p)) throw std::invalid_argument("adam_step: slot shape mismatch");
        const Real decay = config.lr * weight_decay[i];
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (decay != 0.0) p[k] -= decay * p[k];
            s.m[k] = config.beta1 * s.m[k] + (1.0 - config.beta1) * g[k];
            s.v[k] = config.beta2 * s.v[k] + (1.0 - config.beta2) * g[k] * g[k];
            const Real mhat = s.m[k] / bc1;
            const Real vhat = s.v[k] / bc2;
            p[k] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
        }
    }
}

}  // namespace bandana
