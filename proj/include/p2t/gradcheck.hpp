#pragma once

#include <functional>
#include <vector>

#include "p2t/tensor.hpp"

namespace p2t::ad {

// Builds a scalar loss from the given inputs. Called repeatedly with the
// inputs' data perturbed in place, so it must be a pure function of them.
using LossBuilder = std::function<Tensor(std::vector<Tensor>&)>;

// Central finite differences against the analytic gradient. Returns the max
// over all input elements of |analytic - numeric| / max(1e-8, |analytic| +
// |numeric|).
double grad_check(const LossBuilder& builder, std::vector<Tensor>& inputs,
                  double h = 1e-5);

}  // namespace p2t::ad
