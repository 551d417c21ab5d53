#pragma once

#include <cstdint>
#include <vector>

#include "p2t/tensor.hpp"

namespace p2t::ad {

struct AdamState {
  std::uint64_t step_count = 0;
  std::vector<std::vector<double>> m;  // one buffer per parameter
  std::vector<std::vector<double>> v;
};

// Default optimizer hyperparameters; lr and weight decay are caller-chosen.
inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.98;
inline constexpr double kAdamEps = 1e-9;

// Bias-corrected Adam with decoupled weight decay (param -= lr*wd*param
// before the Adam delta). Zeroes every grad afterwards.
void adam_step(std::vector<Tensor>& params, AdamState& state, double lr,
               double beta1 = kAdamBeta1, double beta2 = kAdamBeta2,
               double eps = kAdamEps, double weight_decay = 0.0);

// Scales all grads so their global L2 norm is at most max_norm.
void clip_grad_norm(std::vector<Tensor>& params, double max_norm);

}  // namespace p2t::ad
