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

#include "ftcc/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "ftcc/encoder.hpp"
#include "ftcc/error.hpp"
#include "ftcc/losses.hpp"
#include "ftcc/rng.hpp"

namespace ftcc {

double relative_error(std::span<const double> analytic, std::span<const double> numeric) {
  if (analytic.size() != numeric.size()) throw DimensionError("relative_error: size mismatch");
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  const double scale = std::max(std::sqrt(na), std::sqrt(nn));
  if (scale < 1e-10) return 0.0;
  return std::sqrt(diff) / scale;
}

GradCheckResult check_gradients(const std::function<Tensor()>& loss_fn,
                                std::vector<Tensor> leaves, double h) {
  for (auto& leaf : leaves) leaf.zero_grad();
  backward(loss_fn());
  GradCheckResult result;
  for (auto& leaf : leaves) {
    const std::vector<double> analytic = leaf.grad();
    std::vector<double> numeric(leaf.size());
    auto values = leaf.mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double x = values[i];
      values[i] = x + h;
      const double up = loss_fn().item();
      values[i] = x - h;
      const double down = loss_fn().item();
      values[i] = x;
      numeric[i] = (up - down) / (2.0 * h);
    }
    const double err = relative_error(analytic, numeric);
    result.per_leaf.push_back(err);
    result.max_rel_error = std::max(result.max_rel_error, err);
  }
  return result;
}

namespace {

Tensor random_leaf(SplitMix64& rng, Shape shape, double lo = -2.0, double hi = 2.0) {
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = lo + (hi - lo) * rng.uniform();
  return Tensor::parameter(std::move(shape), std::move(v));
}

Tensor frozen(const Tensor& t) { return Tensor::from(t.shape(), {t.data().begin(), t.data().end()}); }

std::size_t draw(SplitMix64& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

std::vector<int> random_labels(SplitMix64& rng, std::size_t n, std::size_t classes) {
  std::vector<int> out(n);
  for (int& y : out) y = static_cast<int>(rng.below(classes));
  return out;
}

}  // namespace

std::vector<GradSuiteEntry> run_gradient_suite(int instances, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<GradSuiteEntry> out{{"ce", 0.0, 0}, {"scl", 0.0, 0}, {"con", 0.0, 0},
                                  {"cc", 0.0, 0}, {"cc_symmetric", 0.0, 0}, {"encoder", 0.0, 0}};
  const auto record = [&](std::size_t k, const GradCheckResult& r) {
    out[k].max_rel_error = std::max(out[k].max_rel_error, r.max_rel_error);
    out[k].instances += 1;
  };

  for (int it = 0; it < instances; ++it) {
    const std::size_t n = draw(rng, 2, 8);
    const std::size_t d = draw(rng, 2, 8);
    const std::size_t c = draw(rng, 2, 4);
    const double tau = 0.1 + 0.9 * rng.uniform();

    {
      Tensor logits = random_leaf(rng, {n, c});
      const auto labels = random_labels(rng, n, c);
      record(0, check_gradients([&] { return ce_loss(logits, labels); }, {logits}));
    }
    {
      Tensor raw = random_leaf(rng, {n, d});
      const auto labels = random_labels(rng, n, std::min<std::size_t>(c, 2));
      record(1, check_gradients(
                    [&] { return scl_loss({l2_normalize(raw), Tensor(), labels}, tau); }, {raw}));
    }
    {
      const Tensor orig = frozen(random_leaf(rng, {n, c}));
      Tensor aug = random_leaf(rng, {n, c});
      record(2, check_gradients([&] { return consistency_loss(orig, aug); }, {aug}));
    }
    {
      Tensor xo = random_leaf(rng, {n, d});
      Tensor xa = random_leaf(rng, {n, d});
      const Tensor zo_target = l2_normalize(frozen(xo));
      const Tensor za_target = l2_normalize(frozen(xa));
      const UnlabeledPairBatch target{zo_target, za_target, Tensor(), Tensor()};
      record(3, check_gradients(
                    [&] {
                      return cc_loss_with_target(
                          target, {l2_normalize(xo), l2_normalize(xa), Tensor(), Tensor()}, tau);
                    },
                    {xo, xa}));
      record(4, check_gradients(
                    [&] {
                      return cc_loss({l2_normalize(xo), l2_normalize(xa), Tensor(), Tensor()},
                                     tau, false);
                    },
                    {xo, xa}));
    }
    {
      const EncoderDims dims{draw(rng, 4, 12), draw(rng, 2, 6), d, c};
      EncoderParams params = init_params(rng.next(), dims, Featurizer{dims.features, 0, 0});
      // Nonzero biases so every parameter carries signal.
      for (auto& p : params.parameters()) {
        if (p.is_weight) continue;
        for (double& v : p.tensor.mutable_data()) v = -0.5 + rng.uniform();
      }
      std::vector<double> feats(n * dims.features);
      for (double& v : feats) v = rng.uniform() < 0.5 ? 0.0 : 2.0 * rng.uniform();
      const Tensor x = Tensor::from({n, dims.features}, feats);
      std::vector<double> wz(n * d), wl(n * c);
      for (double& v : wz) v = -2.0 + 4.0 * rng.uniform();
      for (double& v : wl) v = -2.0 + 4.0 * rng.uniform();
      std::vector<Tensor> leaves;
      for (auto& p : params.parameters()) leaves.push_back(p.tensor);
      record(5, check_gradients(
                    [&] {
                      const Encoding e = encode(params, x);
                      return add(weighted_sum(e.z, wz), weighted_sum(e.logits, wl));
                    },
                    leaves));
    }
  }
  return out;
}

}  // namespace ftcc
