#pragma once

#include <random>
#include <vector>

#include "p2t/tensor.hpp"

namespace p2t {

// Learnable temporal embedding: element 0 is linear in tau, elements 1..k are
// sine of a learned frequency/phase. Embedding width is k+1.
struct Time2VecParams {
  std::size_t k = 15;
  ad::Tensor omega;  // rank-1, k+1
  ad::Tensor phi;    // rank-1, k+1
};

// omega ~ U[0, 2*pi*fps/window_frames] covers periods from one frame up to the
// full window; phi ~ U[0, 2*pi).
Time2VecParams init_time2vec(std::size_t k, double fps, double window_frames,
                             std::mt19937_64& rng);

// tau in seconds -> T x (k+1), differentiable w.r.t. omega and phi.
ad::Tensor time2vec_forward(const std::vector<double>& tau,
                            const Time2VecParams& params);

// Row-wise concatenation [features | embedding].
ad::Tensor attach_time(const ad::Tensor& features, const ad::Tensor& embedding);

}  // namespace p2t
