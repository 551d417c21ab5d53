#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "p2t/errors.hpp"

namespace p2t::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& s);

// One node of a define-by-run tape. Graphs are rebuilt per forward pass;
// backward_fn accumulates into the parents' grad buffers.
struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // allocated lazily during backward
  bool requires_grad = false;
  std::uint64_t node_id = 0;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void()> backward_fn;

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
};

// Value-semantic handle onto a shared node.
class Tensor {
 public:
  Tensor() = default;

  static Tensor from(Shape shape, std::vector<double> data,
                     bool requires_grad = false);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  const Shape& shape() const { return n_->shape; }
  std::size_t size() const { return n_->data.size(); }
  std::size_t rows() const { return n_->shape.at(0); }
  std::size_t cols() const { return n_->shape.at(1); }
  const std::vector<double>& data() const { return n_->data; }
  std::vector<double>& mutable_data() { return n_->data; }
  const std::vector<double>& grad() const { return n_->grad; }
  std::vector<double>& mutable_grad() { return n_->grad; }
  bool has_grad() const { return !n_->grad.empty(); }
  bool requires_grad() const { return n_->requires_grad; }
  std::uint64_t node_id() const { return n_->node_id; }
  double item() const;
  void zero_grad() { n_->grad.clear(); }

  bool valid() const { return n_ != nullptr; }
  Node* node() const { return n_.get(); }
  const std::shared_ptr<Node>& ptr() const { return n_; }

 private:
  explicit Tensor(std::shared_ptr<Node> n) : n_(std::move(n)) {}
  std::shared_ptr<Node> n_;

  friend Tensor make_op(Shape shape, std::vector<double> data,
                        std::vector<Tensor> inputs,
                        std::function<void(Node&)> make_backward);
};

// --- primitives ---------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
// matrix (T x D) plus row vector (D), broadcast over rows
Tensor add_rowwise(const Tensor& m, const Tensor& v);
Tensor scale(const Tensor& a, double s);
Tensor concat(const Tensor& a, const Tensor& b, std::size_t axis);
Tensor slice(const Tensor& a, std::size_t axis, std::size_t start,
             std::size_t len);
Tensor transpose(const Tensor& a);
Tensor reshape(const Tensor& a, Shape new_shape);
Tensor sin_op(const Tensor& a);
Tensor tanh_op(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor exp_op(const Tensor& a);
Tensor softmax_last(const Tensor& a);
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = 1e-5);
Tensor dropout(const Tensor& x, double p, bool training, std::mt19937_64& rng);
Tensor mean(const Tensor& a);
Tensor square(const Tensor& a);

// String-keyed dispatch over the primitive set; the typed functions above are
// the fast path, this is the uniform surface (and the UnknownPrimitive check).
Tensor forward_primitive(const std::string& kind,
                         const std::vector<Tensor>& inputs,
                         const std::map<std::string, double>& attrs = {});

// Reverse-mode pass from a scalar loss; grads accumulate (+=) across uses.
void backward(const Tensor& loss);

}  // namespace p2t::ad
