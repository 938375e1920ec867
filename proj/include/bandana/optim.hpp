#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bandana/matrix.hpp"

namespace bandana {

struct AdamConfig {
    Real lr = 1e-3;
    Real beta1 = 0.9;
    Real beta2 = 0.999;
    Real eps = 1e-8;
};

/// First/second moment estimates for one parameter tensor.
struct AdamSlot {
    Matrix m;
    Matrix v;
};

struct AdamState {
    std::vector<AdamSlot> slots;
    std::int64_t step = 0;
};

/// One Adam step with bias correction over a set of parameters.
///
/// Weight decay is decoupled: each parameter with a nonzero entry in
/// `weight_decay` is first shrunk by lr * wd * param, then updated from its
/// moment estimates. Slots are created on the first call. If any gradient
/// is non-finite, nothing is modified and std::runtime_error is thrown.
void adam_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads,
               std::span<const Real> weight_decay, AdamState& state, const AdamConfig& config);

}  // namespace bandana
