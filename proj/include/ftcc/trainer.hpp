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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ftcc/augment.hpp"
#include "ftcc/corpus.hpp"
#include "ftcc/encoder.hpp"
#include "ftcc/losses.hpp"
#include "ftcc/rng.hpp"

namespace ftcc {

// CC release gate: max(0, (2t - T) / T). Zero on the first half of
// training, reaching 1 at t = T. Throws ContractError unless 0 <= t <= T.
double alpha_schedule(std::size_t t, std::size_t total_steps);

// Linear warmup from 0 to peak over W = round(warmup_fraction * T) steps,
// then linear decay to 0 at t = T.
double lr_schedule(std::size_t t, std::size_t total_steps, double warmup_fraction,
                   double peak_lr);

struct LossComponents {
  double ce = 0.0;
  std::optional<double> scl;  // absent when its weight is 0
  std::optional<double> con;
  std::optional<double> cc;
};

// ce + l1 * scl + l2 * con + (alpha * l3) * cc, evaluated left to right with
// absent terms counted as 0. Non-finite components raise NumericFault
// naming the component.
double total_loss(const LossComponents& parts, const LossConfig& config, double alpha);

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamMoments {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t t = 0;
};

// One Adam step with bias correction. When `decay` is set, the decoupled
// term lr * weight_decay * param (using the pre-step value) is also
// subtracted.
void adam_step(std::span<double> param, std::span<const double> grad, AdamMoments& state,
               double lr, double weight_decay, bool decay, const AdamHyper& hyper = {});

class Adam {
 public:
  Adam(std::vector<EncoderParams::Named> params, AdamHyper hyper = {});
  // Applies adam_step to every parameter using its accumulated gradient.
  void step(double lr, double weight_decay);

 private:
  std::vector<EncoderParams::Named> params_;
  std::vector<AdamMoments> moments_;
  AdamHyper hyper_;
};

// Cycles through 0..n-1 in reshuffled epochs, `batch` indices at a time; a
// tail shorter than a batch is dropped. When n < batch, indices are drawn
// with replacement instead.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::size_t batch, std::uint64_t seed);
  std::vector<std::size_t> next();
  // Number of completed reshuffles before the last batch was drawn.
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t n_, batch_;
  SplitMix64 rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
  std::size_t epoch_ = 0;
  bool started_ = false;
};

struct TrainConfig {
  std::size_t max_steps = 400;
  std::size_t labeled_batch = 8;
  std::size_t unlabeled_batch = 32;
  double peak_lr = 3e-3;
  double warmup_fraction = 0.1;
  double weight_decay = 0.01;
  LossConfig loss;
  AdamHyper adam;
  std::uint64_t seed = 1;
  EncoderDims dims;  // classes must match the label map
  Featurizer featurizer;
  std::size_t eval_every = 0;  // 0: max(1, max_steps / 20)

  void validate() const;
};

// Random streams derived from TrainConfig::seed.
enum class SeedStream : std::uint64_t { kInit = 0, kLabeled = 1, kUnlabeled = 2, kAugment = 3 };
std::uint64_t stream_seed(std::uint64_t seed, SeedStream stream);

struct StepState {
  std::size_t step = 0;
  double alpha = 0.0;
  double lr = 0.0;
  LossComponents losses;
  double total = 0.0;
};

struct DevPoint {
  std::size_t step;
  double accuracy;
};

struct TrainResult {
  EncoderParams final_params;
  EncoderParams best_params;  // dev-best; the final params when dev is empty
  std::optional<double> best_dev_accuracy;
  std::size_t best_step = 0;
  std::vector<StepState> steps;
  std::vector<DevPoint> dev_curve;
};

// Called after each optimizer step with the updated parameters.
using StepObserver = std::function<void(const StepState&, const EncoderParams&)>;

// Steps t = 1..T. Each step draws a labeled batch and, when lambda2 or
// lambda3 is nonzero, an unlabeled batch plus its augmentations; builds
// ce + l1 scl + l2 con + alpha(t) l3 cc; back-propagates; takes one Adam step
// at lr_schedule(t). Terms with zero weight are not built at all. Dev accuracy
// is measured every eval_every steps and at t = T; the best one wins, ties
// going to the earlier step.
TrainResult train(const CorpusSplit& split, const Augmenter& augmenter,
                  const TrainConfig& config, const StepObserver& observer = {});

}  // namespace ftcc
