#pragma once

#include <functional>
#include <span>
#include <vector>

#include "bandana/autograd.hpp"

namespace oracle {

using Builder = std::function<bandana::Var(bandana::Tape&, std::span<const bandana::Var>)>;

// Largest relative error ‖analytic − numeric‖ / max(‖analytic‖, ‖numeric‖)
// over the inputs, numeric gradients from central differences. The builder
// must be a pure function of its inputs (reseed any Rng inside it).
double gradient_error(const std::vector<bandana::Matrix>& inputs, const Builder& f, double eps = 1e-5);

}  // namespace oracle
