#include "p2t/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <numeric>
#include <unordered_set>

#include "p2t/kernels.hpp"

namespace p2t::ad {

namespace {

std::atomic<std::uint64_t> g_next_id{1};

void check(bool ok, const char* msg) {
  if (!ok) throw ShapeMismatch(msg);
}

// Rows/cols view of a rank-1 or rank-2 tensor: rank-1 is a single row.
std::pair<std::size_t, std::size_t> as_2d(const Shape& s) {
  if (s.size() == 1) return {1, s[0]};
  if (s.size() == 2) return {s[0], s[1]};
  throw ShapeMismatch("op requires rank-1 or rank-2 tensor");
}

}  // namespace

std::size_t numel(const Shape& s) {
  std::size_t n = 1;
  for (auto e : s) n *= e;
  return n;
}

Tensor Tensor::from(Shape shape, std::vector<double> data, bool requires_grad) {
  if (numel(shape) != data.size())
    throw ShapeMismatch("tensor data length does not match shape");
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->data = std::move(data);
  n->requires_grad = requires_grad;
  n->node_id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  return Tensor(std::move(n));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  std::vector<double> d(numel(shape), 0.0);
  return from(std::move(shape), std::move(d), requires_grad);
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return from({1}, {v}, requires_grad);
}

double Tensor::item() const {
  if (size() != 1) throw ShapeMismatch("item() on non-scalar tensor");
  return n_->data[0];
}

Tensor make_op(Shape shape, std::vector<double> data,
               std::vector<Tensor> inputs,
               std::function<void(Node&)> make_backward) {
  auto out = Tensor::from(std::move(shape), std::move(data));
  Node* n = out.node();
  for (const auto& in : inputs) {
    n->parents.push_back(in.ptr());
    if (in.requires_grad()) n->requires_grad = true;
  }
  if (n->requires_grad && make_backward) {
    auto body = std::move(make_backward);
    n->backward_fn = [n, body = std::move(body)]() { body(*n); };
  }
  return out;
}

// --- primitives ---------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  check(a.shape().size() == 2 && b.shape().size() == 2,
        "matmul requires rank-2 operands");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  check(b.rows() == k, "matmul inner dimensions differ");
  std::vector<double> out(m * n);
  kernels::active().gemm(m, k, n, a.data().data(), b.data().data(), out.data(),
                         false);
  return make_op({m, n}, std::move(out), {a, b}, [a, b, m, k, n](Node& self) {
    const auto& g = self.grad;
    if (a.requires_grad()) {
      a.node()->ensure_grad();
      // dA += G * B^T via explicit transpose of B
      std::vector<double> bt(n * k);
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < n; ++j)
          bt[j * k + i] = b.data()[i * n + j];
      kernels::active().gemm(m, n, k, g.data(), bt.data(),
                             a.node()->grad.data(), true);
    }
    if (b.requires_grad()) {
      b.node()->ensure_grad();
      std::vector<double> at(k * m);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < k; ++j)
          at[j * m + i] = a.data()[i * k + j];
      kernels::active().gemm(k, m, n, at.data(), g.data(),
                             b.node()->grad.data(), true);
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  check(a.shape() == b.shape(), "add requires equal shapes");
  std::vector<double> out(a.size());
  kernels::active().add(a.size(), a.data().data(), b.data().data(), out.data());
  return make_op(a.shape(), std::move(out), {a, b}, [a, b](Node& self) {
    if (a.requires_grad()) {
      a.node()->ensure_grad();
      kernels::active().axpy(self.grad.size(), 1.0, self.grad.data(),
                             a.node()->grad.data());
    }
    if (b.requires_grad()) {
      b.node()->ensure_grad();
      kernels::active().axpy(self.grad.size(), 1.0, self.grad.data(),
                             b.node()->grad.data());
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check(a.shape() == b.shape(), "sub requires equal shapes");
  std::vector<double> out(a.size());
  kernels::active().sub(a.size(), a.data().data(), b.data().data(), out.data());
  return make_op(a.shape(), std::move(out), {a, b}, [a, b](Node& self) {
    if (a.requires_grad()) {
      a.node()->ensure_grad();
      kernels::active().axpy(self.grad.size(), 1.0, self.grad.data(),
                             a.node()->grad.data());
    }
    if (b.requires_grad()) {
      b.node()->ensure_grad();
      kernels::active().axpy(self.grad.size(), -1.0, self.grad.data(),
                             b.node()->grad.data());
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check(a.shape() == b.shape(), "mul requires equal shapes");
  std::vector<double> out(a.size());
  kernels::active().mul(a.size(), a.data().data(), b.data().data(), out.data());
  return make_op(a.shape(), std::move(out), {a, b}, [a, b](Node& self) {
    const std::size_t n = self.grad.size();
    std::vector<double> tmp(n);
    if (a.requires_grad()) {
      a.node()->ensure_grad();
      kernels::active().mul(n, self.grad.data(), b.data().data(), tmp.data());
      kernels::active().axpy(n, 1.0, tmp.data(), a.node()->grad.data());
    }
    if (b.requires_grad()) {
      b.node()->ensure_grad();
      kernels::active().mul(n, self.grad.data(), a.data().data(), tmp.data());
      kernels::active().axpy(n, 1.0, tmp.data(), b.node()->grad.data());
    }
  });
}

Tensor add_rowwise(const Tensor& m, const Tensor& v) {
  check(m.shape().size() == 2 && v.shape().size() == 1,
        "add_rowwise takes matrix + row vector");
  const std::size_t rows = m.rows(), cols = m.cols();
  check(v.size() == cols, "add_rowwise width mismatch");
  std::vector<double> out(m.size());
  for (std::size_t r = 0; r < rows; ++r)
    kernels::active().add(cols, m.data().data() + r * cols, v.data().data(),
                          out.data() + r * cols);
  return make_op(m.shape(), std::move(out), {m, v},
                 [m, v, rows, cols](Node& self) {
                   if (m.requires_grad()) {
                     m.node()->ensure_grad();
                     kernels::active().axpy(self.grad.size(), 1.0,
                                            self.grad.data(),
                                            m.node()->grad.data());
                   }
                   if (v.requires_grad()) {
                     v.node()->ensure_grad();
                     for (std::size_t r = 0; r < rows; ++r)
                       kernels::active().axpy(cols, 1.0,
                                              self.grad.data() + r * cols,
                                              v.node()->grad.data());
                   }
                 });
}

Tensor scale(const Tensor& a, double s) {
  std::vector<double> out(a.size());
  kernels::active().scale(a.size(), a.data().data(), s, out.data());
  return make_op(a.shape(), std::move(out), {a}, [a, s](Node& self) {
    if (!a.requires_grad()) return;
    a.node()->ensure_grad();
    kernels::active().axpy(self.grad.size(), s, self.grad.data(),
                           a.node()->grad.data());
  });
}

Tensor concat(const Tensor& a, const Tensor& b, std::size_t axis) {
  if (a.shape().size() == 1 && b.shape().size() == 1) {
    check(axis == 0, "rank-1 concat axis must be 0");
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.data().begin(), a.data().end());
    out.insert(out.end(), b.data().begin(), b.data().end());
    const std::size_t na = a.size();
    return make_op({a.size() + b.size()}, std::move(out), {a, b},
                   [a, b, na](Node& self) {
                     if (a.requires_grad()) {
                       a.node()->ensure_grad();
                       kernels::active().axpy(na, 1.0, self.grad.data(),
                                              a.node()->grad.data());
                     }
                     if (b.requires_grad()) {
                       b.node()->ensure_grad();
                       kernels::active().axpy(b.size(), 1.0,
                                              self.grad.data() + na,
                                              b.node()->grad.data());
                     }
                   });
  }
  check(a.shape().size() == 2 && b.shape().size() == 2 && axis <= 1,
        "concat requires two rank-2 tensors, axis 0 or 1");
  if (axis == 0) {
    check(a.cols() == b.cols(), "concat axis 0: column counts differ");
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.data().begin(), a.data().end());
    out.insert(out.end(), b.data().begin(), b.data().end());
    const std::size_t na = a.size();
    return make_op({a.rows() + b.rows(), a.cols()}, std::move(out), {a, b},
                   [a, b, na](Node& self) {
                     if (a.requires_grad()) {
                       a.node()->ensure_grad();
                       kernels::active().axpy(na, 1.0, self.grad.data(),
                                              a.node()->grad.data());
                     }
                     if (b.requires_grad()) {
                       b.node()->ensure_grad();
                       kernels::active().axpy(b.size(), 1.0,
                                              self.grad.data() + na,
                                              b.node()->grad.data());
                     }
                   });
  }
  check(a.rows() == b.rows(), "concat axis 1: row counts differ");
  const std::size_t rows = a.rows(), ca = a.cols(), cb = b.cols();
  std::vector<double> out(rows * (ca + cb));
  for (std::size_t r = 0; r < rows; ++r) {
    std::memcpy(out.data() + r * (ca + cb), a.data().data() + r * ca,
                ca * sizeof(double));
    std::memcpy(out.data() + r * (ca + cb) + ca, b.data().data() + r * cb,
                cb * sizeof(double));
  }
  return make_op({rows, ca + cb}, std::move(out), {a, b},
                 [a, b, rows, ca, cb](Node& self) {
                   const std::size_t w = ca + cb;
                   if (a.requires_grad()) {
                     a.node()->ensure_grad();
                     for (std::size_t r = 0; r < rows; ++r)
                       kernels::active().axpy(ca, 1.0,
                                              self.grad.data() + r * w,
                                              a.node()->grad.data() + r * ca);
                   }
                   if (b.requires_grad()) {
                     b.node()->ensure_grad();
                     for (std::size_t r = 0; r < rows; ++r)
                       kernels::active().axpy(cb, 1.0,
                                              self.grad.data() + r * w + ca,
                                              b.node()->grad.data() + r * cb);
                   }
                 });
}

Tensor slice(const Tensor& a, std::size_t axis, std::size_t start,
             std::size_t len) {
  if (a.shape().size() == 1) {
    check(axis == 0 && start + len <= a.size(), "slice out of range");
    std::vector<double> out(a.data().begin() + start,
                            a.data().begin() + start + len);
    return make_op({len}, std::move(out), {a}, [a, start, len](Node& self) {
      if (!a.requires_grad()) return;
      a.node()->ensure_grad();
      kernels::active().axpy(len, 1.0, self.grad.data(),
                             a.node()->grad.data() + start);
    });
  }
  check(a.shape().size() == 2 && axis <= 1, "slice: rank-2, axis 0 or 1");
  const std::size_t rows = a.rows(), cols = a.cols();
  if (axis == 0) {
    check(start + len <= rows, "slice rows out of range");
    std::vector<double> out(a.data().begin() + start * cols,
                            a.data().begin() + (start + len) * cols);
    return make_op({len, cols}, std::move(out), {a},
                   [a, start, cols](Node& self) {
                     if (!a.requires_grad()) return;
                     a.node()->ensure_grad();
                     kernels::active().axpy(self.grad.size(), 1.0,
                                            self.grad.data(),
                                            a.node()->grad.data() +
                                                start * cols);
                   });
  }
  check(start + len <= cols, "slice cols out of range");
  std::vector<double> out(rows * len);
  for (std::size_t r = 0; r < rows; ++r)
    std::memcpy(out.data() + r * len, a.data().data() + r * cols + start,
                len * sizeof(double));
  return make_op({rows, len}, std::move(out), {a},
                 [a, rows, cols, start, len](Node& self) {
                   if (!a.requires_grad()) return;
                   a.node()->ensure_grad();
                   for (std::size_t r = 0; r < rows; ++r)
                     kernels::active().axpy(len, 1.0,
                                            self.grad.data() + r * len,
                                            a.node()->grad.data() + r * cols +
                                                start);
                 });
}

Tensor transpose(const Tensor& a) {
  check(a.shape().size() == 2, "transpose requires rank-2");
  const std::size_t rows = a.rows(), cols = a.cols();
  std::vector<double> out(a.size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      out[c * rows + r] = a.data()[r * cols + c];
  return make_op({cols, rows}, std::move(out), {a},
                 [a, rows, cols](Node& self) {
                   if (!a.requires_grad()) return;
                   a.node()->ensure_grad();
                   for (std::size_t r = 0; r < rows; ++r)
                     for (std::size_t c = 0; c < cols; ++c)
                       a.node()->grad[r * cols + c] += self.grad[c * rows + r];
                 });
}

Tensor reshape(const Tensor& a, Shape new_shape) {
  check(numel(new_shape) == a.size(), "reshape changes element count");
  std::vector<double> out = a.data();
  return make_op(std::move(new_shape), std::move(out), {a}, [a](Node& self) {
    if (!a.requires_grad()) return;
    a.node()->ensure_grad();
    kernels::active().axpy(self.grad.size(), 1.0, self.grad.data(),
                           a.node()->grad.data());
  });
}

namespace {

// y = f(x) elementwise, df given y and x
template <typename F, typename DF>
Tensor unary(const Tensor& a, F f, DF df) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a.data()[i]);
  return make_op(a.shape(), std::move(out), {a}, [a, df](Node& self) {
    if (!a.requires_grad()) return;
    a.node()->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      a.node()->grad[i] += self.grad[i] * df(a.data()[i], self.data[i]);
  });
}

}  // namespace

Tensor sin_op(const Tensor& a) {
  return unary(a, [](double x) { return std::sin(x); },
               [](double x, double) { return std::cos(x); });
}

Tensor tanh_op(const Tensor& a) {
  return unary(a, [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
               [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& a) {
  return unary(a, [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor exp_op(const Tensor& a) {
  return unary(a, [](double x) { return std::exp(x); },
               [](double, double y) { return y; });
}

Tensor softmax_last(const Tensor& a) {
  auto [rows, cols] = as_2d(a.shape());
  check(cols >= 1, "softmax over empty axis");
  std::vector<double> out(a.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = a.data().data() + r * cols;
    double* y = out.data() + r * cols;
    double mx = x[0];
    for (std::size_t c = 1; c < cols; ++c) mx = std::max(mx, x[c]);
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      y[c] = std::exp(x[c] - mx);
      sum += y[c];
    }
    for (std::size_t c = 0; c < cols; ++c) y[c] /= sum;
  }
  const std::size_t R = rows, C = cols;
  return make_op(a.shape(), std::move(out), {a}, [a, R, C](Node& self) {
    if (!a.requires_grad()) return;
    a.node()->ensure_grad();
    for (std::size_t r = 0; r < R; ++r) {
      const double* y = self.data.data() + r * C;
      const double* g = self.grad.data() + r * C;
      const double gy = kernels::active().dot(C, g, y);
      double* da = a.node()->grad.data() + r * C;
      for (std::size_t c = 0; c < C; ++c) da[c] += (g[c] - gy) * y[c];
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps) {
  auto [rows, cols] = as_2d(x.shape());
  check(gain.shape().size() == 1 && gain.size() == cols,
        "layer_norm gain width mismatch");
  check(bias.shape().size() == 1 && bias.size() == cols,
        "layer_norm bias width mismatch");
  std::vector<double> out(x.size());
  std::vector<double> xhat(x.size());
  std::vector<double> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data().data() + r * cols;
    double mu = 0.0;
    for (std::size_t c = 0; c < cols; ++c) mu += xr[c];
    mu /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const double d = xr[c] - mu;
      var += d * d;
    }
    var /= static_cast<double>(cols);
    const double inv = 1.0 / std::sqrt(var + eps);
    inv_std[r] = inv;
    for (std::size_t c = 0; c < cols; ++c) {
      xhat[r * cols + c] = (xr[c] - mu) * inv;
      out[r * cols + c] = gain.data()[c] * xhat[r * cols + c] + bias.data()[c];
    }
  }
  const std::size_t R = rows, C = cols;
  return make_op(
      x.shape(), std::move(out), {x, gain, bias},
      [x, gain, bias, R, C, xhat = std::move(xhat),
       inv_std = std::move(inv_std)](Node& self) {
        const double* g = self.grad.data();
        if (gain.requires_grad()) {
          gain.node()->ensure_grad();
          for (std::size_t r = 0; r < R; ++r)
            for (std::size_t c = 0; c < C; ++c)
              gain.node()->grad[c] += g[r * C + c] * xhat[r * C + c];
        }
        if (bias.requires_grad()) {
          bias.node()->ensure_grad();
          for (std::size_t r = 0; r < R; ++r)
            for (std::size_t c = 0; c < C; ++c)
              bias.node()->grad[c] += g[r * C + c];
        }
        if (x.requires_grad()) {
          x.node()->ensure_grad();
          for (std::size_t r = 0; r < R; ++r) {
            double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
            for (std::size_t c = 0; c < C; ++c) {
              const double dxh = g[r * C + c] * gain.data()[c];
              mean_dxhat += dxh;
              mean_dxhat_xhat += dxh * xhat[r * C + c];
            }
            mean_dxhat /= static_cast<double>(C);
            mean_dxhat_xhat /= static_cast<double>(C);
            for (std::size_t c = 0; c < C; ++c) {
              const double dxh = g[r * C + c] * gain.data()[c];
              x.node()->grad[r * C + c] +=
                  inv_std[r] *
                  (dxh - mean_dxhat - xhat[r * C + c] * mean_dxhat_xhat);
            }
          }
        }
      });
}

Tensor dropout(const Tensor& x, double p, bool training, std::mt19937_64& rng) {
  check(p >= 0.0 && p < 1.0, "dropout rate must be in [0,1)");
  if (!training || p == 0.0) return x;  // eval mode is the identity
  std::vector<double> mask(x.size());
  const double keep_scale = 1.0 / (1.0 - p);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    mask[i] = u(rng) < p ? 0.0 : keep_scale;
  std::vector<double> out(x.size());
  kernels::active().mul(x.size(), x.data().data(), mask.data(), out.data());
  return make_op(x.shape(), std::move(out), {x},
                 [x, mask = std::move(mask)](Node& self) {
                   if (!x.requires_grad()) return;
                   x.node()->ensure_grad();
                   for (std::size_t i = 0; i < self.grad.size(); ++i)
                     x.node()->grad[i] += self.grad[i] * mask[i];
                 });
}

Tensor mean(const Tensor& a) {
  check(a.size() >= 1, "mean of empty tensor");
  double s = 0.0;
  for (double v : a.data()) s += v;
  const double n = static_cast<double>(a.size());
  return make_op({1}, {s / n}, {a}, [a, n](Node& self) {
    if (!a.requires_grad()) return;
    a.node()->ensure_grad();
    const double g = self.grad[0] / n;
    for (auto& v : a.node()->grad) v += g;
  });
}

Tensor square(const Tensor& a) {
  return unary(a, [](double x) { return x * x; },
               [](double x, double) { return 2.0 * x; });
}

Tensor forward_primitive(const std::string& kind,
                         const std::vector<Tensor>& inputs,
                         const std::map<std::string, double>& attrs) {
  auto attr = [&](const char* k, double dflt) {
    auto it = attrs.find(k);
    return it == attrs.end() ? dflt : it->second;
  };
  auto need = [&](std::size_t n) {
    if (inputs.size() != n)
      throw ShapeMismatch("wrong input count for primitive '" + kind + "'");
  };
  if (kind == "matmul") { need(2); return matmul(inputs[0], inputs[1]); }
  if (kind == "add") { need(2); return add(inputs[0], inputs[1]); }
  if (kind == "sub") { need(2); return sub(inputs[0], inputs[1]); }
  if (kind == "mul") { need(2); return mul(inputs[0], inputs[1]); }
  if (kind == "scale") { need(1); return scale(inputs[0], attr("s", 1.0)); }
  if (kind == "concat") {
    need(2);
    return concat(inputs[0], inputs[1],
                  static_cast<std::size_t>(attr("axis", 0)));
  }
  if (kind == "slice") {
    need(1);
    return slice(inputs[0], static_cast<std::size_t>(attr("axis", 0)),
                 static_cast<std::size_t>(attr("start", 0)),
                 static_cast<std::size_t>(attr("len", 0)));
  }
  if (kind == "transpose") { need(1); return transpose(inputs[0]); }
  if (kind == "sin") { need(1); return sin_op(inputs[0]); }
  if (kind == "tanh") { need(1); return tanh_op(inputs[0]); }
  if (kind == "sigmoid") { need(1); return sigmoid(inputs[0]); }
  if (kind == "relu") { need(1); return relu(inputs[0]); }
  if (kind == "exp") { need(1); return exp_op(inputs[0]); }
  if (kind == "softmax") { need(1); return softmax_last(inputs[0]); }
  if (kind == "layer_norm") {
    need(3);
    return layer_norm(inputs[0], inputs[1], inputs[2], attr("eps", 1e-5));
  }
  if (kind == "dropout") {
    need(1);
    std::mt19937_64 rng(static_cast<std::uint64_t>(attr("seed", 0)));
    return dropout(inputs[0], attr("p", 0.0), attr("training", 0.0) != 0.0,
                   rng);
  }
  if (kind == "mean") { need(1); return mean(inputs[0]); }
  if (kind == "square") { need(1); return square(inputs[0]); }
  throw UnknownPrimitive("unknown primitive '" + kind + "'");
}

void backward(const Tensor& loss) {
  if (!loss.valid() || loss.size() != 1)
    throw NonScalarLoss("backward requires a scalar loss");
  // post-order DFS, then walk in reverse
  std::vector<Node*> order;
  std::vector<std::pair<Node*, std::size_t>> stack;
  std::unordered_set<Node*> seen;
  order.reserve(256);
  stack.emplace_back(loss.node(), 0);
  seen.insert(loss.node());
  while (!stack.empty()) {
    auto& [n, i] = stack.back();
    if (i < n->parents.size()) {
      Node* p = n->parents[i++].get();
      if (seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  bool any_param = false;
  for (Node* n : order)
    if (n->requires_grad && !n->backward_fn) any_param = true;
  if (!any_param)
    throw DisconnectedGraph("loss does not depend on any parameter");
  loss.node()->ensure_grad();
  loss.node()->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && n->requires_grad) {
      n->ensure_grad();
      n->backward_fn();
    }
  }
}

}  // namespace p2t::ad
