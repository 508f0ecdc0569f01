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

#include "ftcc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "ftcc/error.hpp"

namespace ftcc {

using detail::Node;

std::size_t shape_size(const Shape& shape) noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

std::shared_ptr<Node> make_leaf(Shape shape, std::vector<double> data, bool requires_grad) {
  if (shape.size() > 2) {
    throw DimensionError("tensor rank " + std::to_string(shape.size()) + " not supported");
  }
  if (data.size() != shape_size(shape)) {
    throw DimensionError("data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_string(shape));
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(data);
  node->requires_grad = requires_grad;
  if (requires_grad) node->ensure_grad();
  return node;
}

const Node& ref(const Tensor& t) {
  if (!t.defined()) throw ContractError("operation on an undefined tensor");
  return *t.node();
}

Node& mut(const Tensor& t) {
  if (!t.defined()) throw ContractError("operation on an undefined tensor");
  return *t.node();
}

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " +
                         shape_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
}

void require_temperature(double temperature, const char* op) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ContractError(std::string(op) + ": temperature must be positive and finite");
  }
}

void require_finite(std::span<const double> values, const char* op) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError(std::string(op) + ": non-finite input");
  }
}

// Accumulate `g` into input `k` of `self` if that input wants a gradient.
template <typename Fn>
void accumulate(Node& self, std::size_t k, Fn&& fn) {
  Node& in = *self.inputs[k];
  if (!in.requires_grad) return;
  in.ensure_grad();
  fn(in.grad);
}

}  // namespace

Tensor make_result(Shape shape, std::vector<double> value, std::vector<Tensor> inputs,
                   std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  for (const Tensor& in : inputs) {
    if (in.node()->requires_grad) node->requires_grad = true;
  }
  if (node->requires_grad) {
    node->inputs.reserve(inputs.size());
    for (const Tensor& in : inputs) node->inputs.push_back(in.node());
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

// -- Tensor ----------------------------------------------------------------------

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  std::vector<double> data(shape_size(shape), 0.0);
  return Tensor(make_leaf(std::move(shape), std::move(data), requires_grad));
}

Tensor Tensor::from(Shape shape, std::vector<double> data, bool requires_grad) {
  return Tensor(make_leaf(std::move(shape), std::move(data), requires_grad));
}

Tensor Tensor::scalar(double value) { return Tensor(make_leaf({}, {value}, false)); }

Tensor Tensor::parameter(Shape shape, std::vector<double> data) {
  return Tensor(make_leaf(std::move(shape), std::move(data), true));
}

const Shape& Tensor::shape() const { return ref(*this).shape; }
std::size_t Tensor::size() const { return ref(*this).value.size(); }

std::size_t Tensor::rows() const {
  const Shape& s = shape();
  return s.size() == 2 ? s[0] : 1;
}

std::size_t Tensor::cols() const {
  const Shape& s = shape();
  if (s.empty()) return 1;
  return s.back();
}

std::span<const double> Tensor::data() const { return ref(*this).value; }
std::span<double> Tensor::mutable_data() { return mut(*this).value; }

double Tensor::item() const {
  if (size() != 1) {
    throw ContractError("item() on tensor of shape " + shape_string(shape()));
  }
  return data()[0];
}

bool Tensor::requires_grad() const { return ref(*this).requires_grad; }
bool Tensor::is_stop_grad() const { return ref(*this).stop_grad; }
bool Tensor::has_grad() const { return ref(*this).grad.size() == size(); }

std::vector<double> Tensor::grad() const {
  const Node& n = ref(*this);
  if (n.grad.size() == n.value.size()) return n.grad;
  return std::vector<double>(n.value.size(), 0.0);
}

std::span<const double> Tensor::grad_view() const { return ref(*this).grad; }

void Tensor::zero_grad() {
  Node& n = mut(*this);
  if (n.requires_grad) {
    n.grad.assign(n.value.size(), 0.0);
  } else {
    n.grad.clear();
  }
}

Tensor Tensor::detach_copy() const {
  const Node& n = ref(*this);
  Tensor out(make_leaf(n.shape, n.value, n.requires_grad && n.inputs.empty()));
  return out;
}

// -- linear algebra -----------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const std::size_t m = a.shape()[0], k = a.shape()[1], p = b.shape()[1];
  if (b.shape()[0] != k) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_string(a.shape()) +
                         " . " + shape_string(b.shape()));
  }
  const auto av = a.data();
  const auto bv = b.data();
  std::vector<double> out(m * p, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data() + i * p;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double aik = av[i * k + kk];
      if (aik == 0.0) continue;
      const double* brow = bv.data() + kk * p;
      for (std::size_t j = 0; j < p; ++j) row[j] += aik * brow[j];
    }
  }
  return make_result({m, p}, std::move(out), {a, b}, [m, k, p](Node& self) {
    const auto& g = self.grad;
    const auto& av = self.inputs[0]->value;
    const auto& bv = self.inputs[1]->value;
    // dA = G . B^T
    accumulate(self, 0, [&](std::vector<double>& ga) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t kk = 0; kk < k; ++kk) {
          double acc = 0.0;
          for (std::size_t j = 0; j < p; ++j) acc += g[i * p + j] * bv[kk * p + j];
          ga[i * k + kk] += acc;
        }
      }
    });
    // dB = A^T . G
    accumulate(self, 1, [&](std::vector<double>& gb) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t kk = 0; kk < k; ++kk) {
          const double aik = av[i * k + kk];
          if (aik == 0.0) continue;
          for (std::size_t j = 0; j < p; ++j) gb[kk * p + j] += aik * g[i * p + j];
        }
      }
    });
  });
}

Tensor transpose(const Tensor& a) {
  require_rank2(a, "transpose");
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  const auto av = a.data();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = av[i * n + j];
  return make_result({n, m}, std::move(out), {a}, [m, n](Node& self) {
    accumulate(self, 0, [&](std::vector<double>& ga) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += self.grad[j * m + i];
    });
  });
}

// -- elementwise ---------------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  const auto av = a.data();
  const auto bv = b.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      accumulate(self, k, [&](std::vector<double>& gi) {
        for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += self.grad[i];
      });
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  const auto av = a.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * factor;
  return make_result(a.shape(), std::move(out), {a}, [factor](Node& self) {
    accumulate(self, 0, [&](std::vector<double>& ga) {
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i] * factor;
    });
  });
}

Tensor add_row_bias(const Tensor& a, const Tensor& bias) {
  const std::size_t m = a.rows(), n = a.cols();
  if (bias.rank() != 1 || bias.size() != n) {
    throw DimensionError("add_row_bias: bias " + shape_string(bias.shape()) +
                         " does not match rows of " + shape_string(a.shape()));
  }
  const auto av = a.data();
  const auto bv = bias.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = av[i * n + j] + bv[j];
  return make_result(a.shape(), std::move(out), {a, bias}, [m, n](Node& self) {
    accumulate(self, 0, [&](std::vector<double>& ga) {
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i];
    });
    accumulate(self, 1, [&](std::vector<double>& gb) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gb[j] += self.grad[i * n + j];
    });
  });
}

Tensor tanh(const Tensor& a) {
  const auto av = a.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(av[i]);
  return make_result(a.shape(), std::move(out), {a}, [](Node& self) {
    accumulate(self, 0, [&](std::vector<double>& ga) {
      for (std::size_t i = 0; i < ga.size(); ++i) {
        const double y = self.value[i];
        ga[i] += self.grad[i] * (1.0 - y * y);
      }
    });
  });
}

// -- row-wise distributions -------------------------------------------------------------

namespace {

// Fills `probs` with softmax(row / t) and returns log-sum-exp of row / t.
double stable_softmax_row(const double* row, std::size_t n, double t, double* probs) {
  double mx = row[0] / t;
  for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, row[j] / t);
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    probs[j] = std::exp(row[j] / t - mx);
    total += probs[j];
  }
  for (std::size_t j = 0; j < n; ++j) probs[j] /= total;
  return mx + std::log(total);
}

}  // namespace

Tensor softmax(const Tensor& x, double temperature) {
  require_temperature(temperature, "softmax");
  require_finite(x.data(), "softmax");
  const std::size_t m = x.rows(), n = x.cols();
  if (n == 0) throw ContractError("softmax: empty row");
  const auto xv = x.data();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < m; ++i)
    stable_softmax_row(xv.data() + i * n, n, temperature, out.data() + i * n);
  return make_result(x.shape(), std::move(out), {x}, [m, n, temperature](Node& self) {
    accumulate(self, 0, [&](std::vector<double>& gx) {
      for (std::size_t i = 0; i < m; ++i) {
        const double* y = self.value.data() + i * n;
        const double* g = self.grad.data() + i * n;
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += g[j] * y[j];
        for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += y[j] * (g[j] - dot) / temperature;
      }
    });
  });
}

Tensor log_softmax(const Tensor& x, double temperature) {
  require_temperature(temperature, "log_softmax");
  require_finite(x.data(), "log_softmax");
  const std::size_t m = x.rows(), n = x.cols();
  if (n == 0) throw ContractError("log_softmax: empty row");
  const auto xv = x.data();
  std::vector<double> out(xv.size());
  std::vector<double> probs(xv.size());
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = xv.data() + i * n;
    const double lse = stable_softmax_row(row, n, temperature, probs.data() + i * n);
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = row[j] / temperature - lse;
  }
  return make_result(
      x.shape(), std::move(out), {x},
      [m, n, temperature, probs = std::move(probs)](Node& self) {
        accumulate(self, 0, [&](std::vector<double>& gx) {
          for (std::size_t i = 0; i < m; ++i) {
            const double* g = self.grad.data() + i * n;
            double gsum = 0.0;
            for (std::size_t j = 0; j < n; ++j) gsum += g[j];
            for (std::size_t j = 0; j < n; ++j)
              gx[i * n + j] += (g[j] - probs[i * n + j] * gsum) / temperature;
          }
        });
      });
}

Tensor l2_normalize(const Tensor& x, Degenerate mode) {
  const std::size_t m = x.rows(), n = x.cols();
  const auto xv = x.data();
  std::vector<double> out(xv.size());
  // norms[i] == 0 marks a fallback row.
  std::vector<double> norms(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = xv.data() + i * n;
    double sq = 0.0;
    for (std::size_t j = 0; j < n; ++j) sq += row[j] * row[j];
    const double norm = std::sqrt(sq);
    if (!std::isfinite(norm)) throw NumericError("l2_normalize: non-finite input");
    if (norm <= kNormEpsilon) {
      if (mode == Degenerate::kThrow) {
        throw DegenerateVectorError("l2_normalize: row " + std::to_string(i) +
                                    " has norm below 1e-12");
      }
      norms[i] = 0.0;
      const double u = 1.0 / std::sqrt(static_cast<double>(n));
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] = u;
      continue;
    }
    norms[i] = norm;
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = row[j] / norm;
  }
  return make_result(x.shape(), std::move(out), {x}, [m, n, norms = std::move(norms)](Node& self) {
    // Projection Jacobian: (I - z z^T) / |x|.
    accumulate(self, 0, [&](std::vector<double>& gx) {
      for (std::size_t i = 0; i < m; ++i) {
        if (norms[i] == 0.0) continue;
        const double* z = self.value.data() + i * n;
        const double* g = self.grad.data() + i * n;
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += z[j] * g[j];
        for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += (g[j] - z[j] * dot) / norms[i];
      }
    });
  });
}

Tensor kl_div(const Tensor& p, const Tensor& log_q) {
  require_same_shape(p, log_q, "kl_div");
  const std::size_t m = p.rows(), n = p.cols();
  const auto pv = p.data();
  const auto lq = log_q.data();
  for (std::size_t i = 0; i < m; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = pv[i * n + j];
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ContractError("kl_div: p has a negative or non-finite entry in row " +
                            std::to_string(i));
      }
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-8) {
      throw ContractError("kl_div: row " + std::to_string(i) + " of p sums to " +
                          std::to_string(total));
    }
  }
  for (double v : lq) {
    if (!std::isfinite(v)) throw ContractError("kl_div: log_q is not finite");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    if (pv[i] == 0.0) continue;
    acc += pv[i] * (std::log(pv[i]) - lq[i]);
  }
  return make_result({}, {acc}, {p, log_q}, [](Node& self) {
    const double g = self.grad[0];
    const auto& pv = self.inputs[0]->value;
    const auto& lq = self.inputs[1]->value;
    // d/dp [p log p] diverges at p = 0; those entries get no gradient.
    accumulate(self, 0, [&](std::vector<double>& gp) {
      for (std::size_t i = 0; i < pv.size(); ++i) {
        if (pv[i] == 0.0) continue;
        gp[i] += g * (std::log(pv[i]) - lq[i] + 1.0);
      }
    });
    accumulate(self, 1, [&](std::vector<double>& gq) {
      for (std::size_t i = 0; i < pv.size(); ++i) gq[i] -= g * pv[i];
    });
  });
}

// -- reductions and indexing -------------------------------------------------------------

Tensor sum(const Tensor& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v;
  return make_result({}, {acc}, {a}, [](Node& self) {
    accumulate(self, 0, [&](std::vector<double>& ga) {
      for (double& v : ga) v += self.grad[0];
    });
  });
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw ContractError("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor weighted_sum(const Tensor& a, std::span<const double> weights) {
  if (weights.size() != a.size()) {
    throw DimensionError("weighted_sum: " + std::to_string(weights.size()) +
                         " weights for " + std::to_string(a.size()) + " values");
  }
  const auto av = a.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) acc += weights[i] * av[i];
  std::vector<double> w(weights.begin(), weights.end());
  return make_result({}, {acc}, {a}, [w = std::move(w)](Node& self) {
    accumulate(self, 0, [&](std::vector<double>& ga) {
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[0] * w[i];
    });
  });
}

Tensor gather(const Tensor& a, std::span<const std::size_t> indices, Shape shape) {
  if (shape_size(shape) != indices.size()) {
    throw DimensionError("gather: " + std::to_string(indices.size()) +
                         " indices for output shape " + shape_string(shape));
  }
  const auto av = a.data();
  std::vector<double> out(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= av.size()) {
      throw ContractError("gather: index " + std::to_string(indices[i]) + " out of range");
    }
    out[i] = av[indices[i]];
  }
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return make_result(std::move(shape), std::move(out), {a}, [idx = std::move(idx)](Node& self) {
    accumulate(self, 0, [&](std::vector<double>& ga) {
      for (std::size_t i = 0; i < idx.size(); ++i) ga[idx[i]] += self.grad[i];
    });
  });
}

Tensor take_rows(const Tensor& a, std::span<const std::size_t> rows) {
  require_rank2(a, "take_rows");
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  std::vector<std::size_t> idx;
  idx.reserve(rows.size() * n);
  for (std::size_t r : rows) {
    if (r >= m) throw ContractError("take_rows: row " + std::to_string(r) + " out of range");
    for (std::size_t j = 0; j < n; ++j) idx.push_back(r * n + j);
  }
  return gather(a, idx, {rows.size(), n});
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  require_rank2(a, "concat_rows");
  require_rank2(b, "concat_rows");
  if (a.shape()[1] != b.shape()[1]) {
    throw DimensionError("concat_rows: " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
  const std::size_t na = a.size();
  std::vector<double> out(a.data().begin(), a.data().end());
  out.insert(out.end(), b.data().begin(), b.data().end());
  return make_result({a.shape()[0] + b.shape()[0], a.shape()[1]}, std::move(out), {a, b},
                     [na](Node& self) {
                       accumulate(self, 0, [&](std::vector<double>& ga) {
                         for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i];
                       });
                       accumulate(self, 1, [&](std::vector<double>& gb) {
                         for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += self.grad[na + i];
                       });
                     });
}

Tensor stop_gradient(const Tensor& a) {
  Tensor out = Tensor::from(a.shape(), std::vector<double>(a.data().begin(), a.data().end()));
  out.node()->stop_grad = true;
  return out;
}

// -- reverse sweep ------------------------------------------------------------------

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward: root must be a scalar, got " +
                        (loss.defined() ? shape_string(loss.shape()) : std::string("undefined")));
  }
  Node* root = loss.node().get();
  if (!root->requires_grad) return;

  // Iterative post-order DFS over nodes that require grad.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{root, 0}};
  visited.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    if (!n->inputs.empty()) n->grad.assign(n->value.size(), 0.0);
  }
  root->ensure_grad();
  root->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward) n->backward(*n);
  }
}

}  // namespace ftcc
