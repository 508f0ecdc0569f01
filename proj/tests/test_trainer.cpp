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


#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "ftcc/error.hpp"
#include "ftcc/synthetic.hpp"
#include "ftcc/trainer.hpp"

using namespace ftcc;

namespace {

CorpusSplit small_split(std::uint64_t seed = 1) {
  SyntheticSpec spec;
  spec.min_tokens = 2;
  spec.max_tokens = 4;
  auto pool = synthetic_corpus(200, 77, spec, "p");
  return make_split(pool, 2, {4, 60, 40}, seed);
}

TrainConfig small_config() {
  TrainConfig c;
  c.max_steps = 40;
  c.labeled_batch = 4;
  c.unlabeled_batch = 8;
  c.dims = {256, 12, 6, 2};
  c.featurizer = {256, 0, 0};
  c.eval_every = 5;
  return c;
}

const Augmenter kNoise = Augmenter::lexical({0.2, 0.1}, 3);

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("alpha schedule") {
  for (std::size_t T : {4u, 8u, 400u, 1000u}) {
    for (std::size_t t = 0; t <= T / 2; ++t) CHECK(alpha_schedule(t, T) == 0.0);
    CHECK(alpha_schedule(T, T) == 1.0);
    CHECK(alpha_schedule(3 * T / 4, T) == 0.5);
  }
  CHECK(alpha_schedule(3, 10) == 0.0);
  CHECK(alpha_schedule(7, 10) == doctest::Approx(0.4));
  CHECK_THROWS_AS(alpha_schedule(11, 10), ContractError);
}

TEST_CASE("learning rate schedule") {
  const std::size_t T = 400;
  CHECK(lr_schedule(0, T, 0.1, 3e-3) == 0.0);
  CHECK(lr_schedule(40, T, 0.1, 3e-3) == 3e-3);
  CHECK(lr_schedule(20, T, 0.1, 3e-3) == doctest::Approx(1.5e-3).epsilon(1e-15));
  CHECK(lr_schedule(T, T, 0.1, 3e-3) == 0.0);
  CHECK(lr_schedule(220, T, 0.1, 3e-3) == doctest::Approx(1.5e-3).epsilon(1e-15));
  double prev = -1;
  for (std::size_t t = 0; t <= 40; ++t) {
    const double lr = lr_schedule(t, T, 0.1, 3e-3);
    CHECK(lr > prev);
    prev = lr;
  }
  for (std::size_t t = 41; t <= T; ++t) {
    const double lr = lr_schedule(t, T, 0.1, 3e-3);
    CHECK(lr < prev);
    prev = lr;
  }
  CHECK(lr_schedule(0, 10, 0.0, 1.0) == 1.0);
}

TEST_CASE("total loss") {
  LossConfig lc;
  const LossComponents parts{1, 2, 3, 4};
  CHECK(total_loss(parts, lc, 0.0) == 6.0);
  CHECK(total_loss(parts, lc, 1.0) == 10.0);
  lc.lambda1 = lc.lambda2 = lc.lambda3 = 0;
  CHECK(total_loss(parts, lc, 1.0) == 1.0);
  CHECK(total_loss({1.5, std::nullopt, std::nullopt, std::nullopt}, LossConfig{}, 1.0) == 1.5);
  try {
    total_loss({1, std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0}, LossConfig{}, 0.0);
    FAIL("expected NumericFault");
  } catch (const NumericFault& e) {
    CHECK(std::string(e.what()).find("l_scl") != std::string::npos);
  }
}

TEST_CASE("adam steps") {
  AdamMoments m;
  std::vector<double> p{1.0, -2.0};
  const std::vector<double> zero{0.0, 0.0};
  adam_step(p, zero, m, 0.1, 0.0, false);
  CHECK(p == std::vector<double>{1.0, -2.0});

  // One step on w^2 from w = 1: grad 2, bias-corrected moments 2 and 4.
  AdamMoments m2;
  std::vector<double> w{1.0};
  adam_step(w, std::vector<double>{2.0}, m2, 0.1, 0.0, false);
  CHECK(w[0] == doctest::Approx(1.0 - 0.1 * 2.0 / (2.0 + 1e-8)).epsilon(1e-15));

  // Decoupled decay with zero gradient shrinks by exactly lr * wd * w.
  AdamMoments m3;
  std::vector<double> d{3.0};
  adam_step(d, std::vector<double>{0.0}, m3, 0.1, 0.01, true);
  CHECK(d[0] == 3.0 - 0.1 * 0.01 * 3.0);
  AdamMoments m4;
  std::vector<double> nd{3.0};
  adam_step(nd, std::vector<double>{0.0}, m4, 0.1, 0.01, false);
  CHECK(nd[0] == 3.0);
}

TEST_CASE("batch sampler") {
  BatchSampler s(10, 4, 5);
  std::vector<int> seen(10, 0);
  for (int b = 0; b < 2; ++b)
    for (auto i : s.next()) ++seen[i];
  for (int c : seen) CHECK(c <= 1);
  CHECK(s.epoch() == 0);
  s.next();  // tail of two dropped, new epoch
  CHECK(s.epoch() == 1);

  BatchSampler small(3, 8, 5);
  const auto b = small.next();
  CHECK(b.size() == 8);
  for (auto i : b) CHECK(i < 3);
  CHECK_THROWS_AS(BatchSampler(0, 4, 1), ConfigError);
}

TEST_CASE("training is bitwise deterministic") {
  const auto split = small_split();
  const auto cfg = small_config();
  const auto a = train(split, kNoise, cfg);
  const auto b = train(split, kNoise, cfg);
  CHECK(a.final_params.identical(b.final_params));
  CHECK(a.best_params.identical(b.best_params));
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) CHECK(same_bits(a.steps[i].total, b.steps[i].total));
  auto other = cfg;
  other.seed = 2;
  CHECK_FALSE(train(split, kNoise, other).final_params.identical(a.final_params));
}

TEST_CASE("logged totals reconstruct from components") {
  const auto split = small_split();
  const auto cfg = small_config();
  const auto r = train(split, kNoise, cfg);
  REQUIRE(r.steps.size() == cfg.max_steps);
  for (const auto& s : r.steps) {
    CHECK(s.losses.scl.has_value());
    CHECK(s.losses.con.has_value());
    CHECK(s.losses.cc.has_value());
    CHECK(std::abs(s.total - total_loss(s.losses, cfg.loss, s.alpha)) <= 1e-12);
    CHECK(s.alpha == alpha_schedule(s.step, cfg.max_steps));
  }
  auto no_cc = cfg;
  no_cc.loss.lambda3 = 0;
  for (const auto& s : train(split, kNoise, no_cc).steps) CHECK_FALSE(s.losses.cc.has_value());
}

TEST_CASE("all weights zero reproduces a plain cross-entropy loop") {
  const auto split = small_split();
  auto cfg = small_config();
  cfg.loss.lambda1 = cfg.loss.lambda2 = cfg.loss.lambda3 = 0;
  const auto r = train(split, kNoise, cfg);

  // Written against the public pieces only.
  auto params = init_params(stream_seed(cfg.seed, SeedStream::kInit), cfg.dims, cfg.featurizer);
  Adam opt(params.parameters(), cfg.adam);
  BatchSampler sampler(split.labeled.size(), cfg.labeled_batch,
                       stream_seed(cfg.seed, SeedStream::kLabeled));
  for (std::size_t t = 1; t <= cfg.max_steps; ++t) {
    std::vector<FeatureVector> rows;
    std::vector<int> y;
    for (auto i : sampler.next()) {
      rows.push_back(cfg.featurizer(split.labeled[i].text));
      y.push_back(*split.labeled[i].label);
    }
    const Tensor loss = ce_loss(encode(params, feature_matrix(rows)).logits, y);
    params.zero_grad();
    backward(loss);
    opt.step(lr_schedule(t, cfg.max_steps, cfg.warmup_fraction, cfg.peak_lr), cfg.weight_decay);
  }
  CHECK(params.identical(r.final_params));
}

TEST_CASE("cc stays out of the update until the second half") {
  const auto split = small_split();
  auto cc_only = small_config();
  cc_only.loss.lambda1 = cc_only.loss.lambda2 = 0;
  auto ce_only = cc_only;
  ce_only.loss.lambda3 = 0;
  const std::size_t half = cc_only.max_steps / 2;

  std::vector<EncoderParams> a, b;
  train(split, kNoise, cc_only, [&](const StepState&, const EncoderParams& p) { a.push_back(p.clone()); });
  train(split, kNoise, ce_only, [&](const StepState&, const EncoderParams& p) { b.push_back(p.clone()); });
  REQUIRE(a.size() == cc_only.max_steps);
  for (std::size_t t = 0; t < half; ++t) CHECK(a[t].identical(b[t]));
  CHECK_FALSE(a.back().identical(b.back()));
}

TEST_CASE("non-finite loss aborts with a numeric fault") {
  const auto split = small_split();
  auto cfg = small_config();
  cfg.peak_lr = 1e300;
  cfg.warmup_fraction = 0.0;
  try {
    train(split, kNoise, cfg);
    FAIL("expected NumericFault");
  } catch (const NumericFault& e) {
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}

TEST_CASE("dev-best parameters are kept") {
  const auto split = small_split();
  const auto cfg = small_config();
  const auto r = train(split, kNoise, cfg);
  REQUIRE(r.best_dev_accuracy.has_value());
  CHECK(r.dev_curve.size() == cfg.max_steps / cfg.eval_every);
  double best = -1;
  std::size_t step = 0;
  for (const auto& p : r.dev_curve)
    if (p.accuracy > best) {
      best = p.accuracy;
      step = p.step;
    }
  CHECK(*r.best_dev_accuracy == best);
  CHECK(r.best_step == step);

  auto no_dev = split;
  no_dev.dev.clear();
  const auto nd = train(no_dev, kNoise, cfg);
  CHECK_FALSE(nd.best_dev_accuracy.has_value());
  CHECK(nd.best_params.identical(nd.final_params));
}

TEST_CASE("configuration errors") {
  auto split = small_split();
  auto cfg = small_config();
  auto empty = split;
  empty.unlabeled.clear();
  CHECK_THROWS_AS(train(empty, kNoise, cfg), ConfigError);
  auto bad = cfg;
  bad.loss.tau_scl = 0;
  CHECK_THROWS_AS(train(split, kNoise, bad), ConfigError);
}
