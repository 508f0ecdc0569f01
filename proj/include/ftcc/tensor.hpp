// Copyright 2026 The ftcc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense fp64 tensors with define-by-run reverse-mode differentiation.
//
// Only the primitives needed by the MLP encoder and the training losses are
// provided. Tensors have rank 0 (scalar), 1 or 2. Row-wise kernels treat a
// rank-1 tensor as a single row. A graph is built by calling the free
// functions below and is torn down when the last handle to its root goes
// away; parameter leaves hold no inputs, so they outlive every graph.

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ftcc {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape) noexcept;
std::string shape_string(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until needed; same size as value otherwise
  bool requires_grad = false;
  bool stop_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into inputs that require grad.
  std::function<void(Node&)> backward;

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

}  // namespace detail

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double value);
  // Trainable leaf: requires_grad set and a zeroed gradient allocated.
  static Tensor parameter(Shape shape, std::vector<double> data);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;
  // Rows/cols of the row-wise view: rank 0 -> 1x1, rank 1 [n] -> 1xn.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const;
  // Direct write access; meant for leaves (optimizer updates, FD probes).
  std::span<double> mutable_data();
  double item() const;
  double at(std::size_t i) const { return data()[i]; }
  double at(std::size_t r, std::size_t c) const { return data()[r * cols() + c]; }

  bool requires_grad() const;
  bool is_stop_grad() const;
  bool has_grad() const;
  // Zeros when no gradient has been allocated.
  std::vector<double> grad() const;
  std::span<const double> grad_view() const;
  void zero_grad();

  // Deep copy of the values into a fresh leaf with the same flags.
  Tensor detach_copy() const;

  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  friend Tensor make_result(Shape, std::vector<double>, std::vector<Tensor>,
                            std::function<void(detail::Node&)>);
  std::shared_ptr<detail::Node> node_;
};

// Builds an op output. Exposed for the op implementations in this module.
Tensor make_result(Shape shape, std::vector<double> value, std::vector<Tensor> inputs,
                   std::function<void(detail::Node&)> backward);

// Norm floor shared by l2_normalize and the encoder.
inline constexpr double kNormEpsilon = 1e-12;

// -- linear algebra ---------------------------------------------------------

// [m x k] . [k x p]. Zero entries of `a` are skipped, which keeps hashed
// sparse feature inputs cheap.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// -- elementwise -----------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
// a[m x n] + bias[n] broadcast over rows.
Tensor add_row_bias(const Tensor& a, const Tensor& bias);
Tensor tanh(const Tensor& a);

// -- row-wise distributions -------------------------------------------------

// softmax(x / temperature) per row, max-subtracted.
Tensor softmax(const Tensor& x, double temperature = 1.0);
// log softmax(x / temperature) per row via log-sum-exp.
Tensor log_softmax(const Tensor& x, double temperature = 1.0);

enum class Degenerate {
  kThrow,     // DegenerateVectorError when a row norm is <= kNormEpsilon
  kFallback,  // such rows map to the constant unit vector 1/sqrt(n), zero grad
};
Tensor l2_normalize(const Tensor& x, Degenerate mode = Degenerate::kThrow);

// sum p * (log p - log_q) over all entries with 0 log 0 := 0. Every row of
// p must be a probability vector (nonnegative, sums to 1 within 1e-8).
Tensor kl_div(const Tensor& p, const Tensor& log_q);

// -- reductions and indexing --------------------------------------------------

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
// sum_i weights[i] * a[i] over the flat data.
Tensor weighted_sum(const Tensor& a, std::span<const double> weights);
// out.flat[i] = a.flat[indices[i]], reshaped to `shape`.
Tensor gather(const Tensor& a, std::span<const std::size_t> indices, Shape shape);
Tensor take_rows(const Tensor& a, std::span<const std::size_t> rows);
Tensor concat_rows(const Tensor& a, const Tensor& b);

// Copy of the values that blocks all gradient flow back into `a`.
Tensor stop_gradient(const Tensor& a);

// Reverse sweep from a scalar root; accumulates into every reachable leaf
// gradient. Non-scalar roots throw ContractError.
void backward(const Tensor& loss);

}  // namespace ftcc
