#include "p2t/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace p2t::ad {

double grad_check(const LossBuilder& builder, std::vector<Tensor>& inputs,
                  double h) {
  for (auto& in : inputs) in.zero_grad();
  Tensor loss = builder(inputs);
  std::vector<std::vector<double>> analytic(inputs.size());
  if (loss.requires_grad()) {
    backward(loss);
    for (std::size_t i = 0; i < inputs.size(); ++i)
      analytic[i] = inputs[i].has_grad()
                        ? inputs[i].grad()
                        : std::vector<double>(inputs[i].size(), 0.0);
  } else {
    // loss does not depend on the inputs at all
    for (std::size_t i = 0; i < inputs.size(); ++i)
      analytic[i].assign(inputs[i].size(), 0.0);
  }
  double max_err = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto& data = inputs[i].mutable_data();
    for (std::size_t j = 0; j < data.size(); ++j) {
      const double orig = data[j];
      data[j] = orig + h;
      const double fp = builder(inputs).item();
      data[j] = orig - h;
      const double fm = builder(inputs).item();
      data[j] = orig;
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic[i][j];
      // the floor absorbs central-difference roundoff on true-zero gradients
      // (e.g. attention key biases, which cancel under softmax)
      const double err =
          std::abs(a - numeric) / std::max(1e-6, std::abs(a) + std::abs(numeric));
      max_err = std::max(max_err, err);
    }
  }
  for (auto& in : inputs) in.zero_grad();
  return max_err;
}

}  // namespace p2t::ad
