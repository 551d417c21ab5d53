#include "p2t/adam.hpp"

#include <cmath>

#include "p2t/kernels.hpp"

namespace p2t::ad {

void adam_step(std::vector<Tensor>& params, AdamState& state, double lr,
               double beta1, double beta2, double eps, double weight_decay) {
  if (state.m.empty()) {
    state.m.resize(params.size());
    state.v.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i].assign(params[i].size(), 0.0);
      state.v[i].assign(params[i].size(), 0.0);
    }
  }
  for (const auto& p : params)
    if (!p.has_grad())
      throw MissingGradient("adam_step: parameter has no gradient");
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(beta1, t);
  const double bc2 = 1.0 - std::pow(beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i].mutable_data();
    const auto& g = params[i].grad();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (weight_decay != 0.0) p[j] -= lr * weight_decay * p[j];
      m[j] = beta1 * m[j] + (1.0 - beta1) * g[j];
      v[j] = beta2 * v[j] + (1.0 - beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
    params[i].zero_grad();
  }
}

void clip_grad_norm(std::vector<Tensor>& params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params) {
    if (!p.has_grad()) continue;
    sq += kernels::active().dot(p.grad().size(), p.grad().data(),
                                p.grad().data());
  }
  const double norm = std::sqrt(sq);
  if (norm <= max_norm || norm == 0.0) return;
  const double s = max_norm / norm;
  for (auto& p : params) {
    if (!p.has_grad()) continue;
    auto& g = p.mutable_grad();
    kernels::active().scale(g.size(), g.data(), s, g.data());
  }
}

}  // namespace p2t::ad
