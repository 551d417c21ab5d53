#include "p2t/time2vec.hpp"

#include <numbers>

namespace p2t {

using ad::Tensor;

Time2VecParams init_time2vec(std::size_t k, double fps, double window_frames,
                             std::mt19937_64& rng) {
  if (k < 1) throw InvalidConfig("time2vec k must be >= 1");
  const double omega_max =
      2.0 * std::numbers::pi * fps / std::max(1.0, window_frames);
  std::uniform_real_distribution<double> uo(0.0, omega_max);
  std::uniform_real_distribution<double> up(0.0, 2.0 * std::numbers::pi);
  std::vector<double> omega(k + 1), phi(k + 1);
  for (auto& w : omega) w = uo(rng);
  for (auto& p : phi) p = up(rng);
  Time2VecParams params;
  params.k = k;
  params.omega = Tensor::from({k + 1}, std::move(omega), true);
  params.phi = Tensor::from({k + 1}, std::move(phi), true);
  return params;
}

Tensor time2vec_forward(const std::vector<double>& tau,
                        const Time2VecParams& params) {
  const std::size_t T = tau.size();
  const std::size_t width = params.k + 1;
  // arg[t][i] = omega_i * tau_t + phi_i, outer product then rowwise phase
  Tensor tau_col = Tensor::from({T, 1}, std::vector<double>(tau));
  Tensor omega_row = ad::reshape(params.omega, {1, width});
  Tensor arg = ad::add_rowwise(ad::matmul(tau_col, omega_row), params.phi);
  Tensor linear = ad::slice(arg, 1, 0, 1);
  Tensor periodic = ad::sin_op(ad::slice(arg, 1, 1, params.k));
  return ad::concat(linear, periodic, 1);
}

Tensor attach_time(const Tensor& features, const Tensor& embedding) {
  if (features.shape().size() != 2 || embedding.shape().size() != 2 ||
      features.rows() != embedding.rows())
    throw LengthMismatch("attach_time: row counts differ");
  if (features.rows() == 0)
    return Tensor::zeros({0, features.cols() + embedding.cols()});
  return ad::concat(features, embedding, 1);
}

}  // namespace p2t
