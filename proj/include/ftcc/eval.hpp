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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ftcc/corpus.hpp"
#include "ftcc/encoder.hpp"
#include "ftcc/trainer.hpp"

namespace ftcc {

// Percentage of examples whose argmax logit equals the label. Every example
// must be labeled; the set must be non-empty.
double accuracy(const EncoderParams& params, std::span<const Example> examples);

struct RunMetrics {
  std::vector<double> per_seed_accuracy;  // percentages
  double mean = 0.0;
  double sem = 0.0;  // sample standard deviation / sqrt(k)
  std::string fingerprint;

  // "86.43±1.21"
  std::string format() const;
};

std::string format_mean_sem(double mean, double sem);

// At least two runs; otherwise ContractError.
RunMetrics aggregate(std::span<const double> accuracies, std::string fingerprint = {});
// Pools the per-seed accuracies of single- or multi-seed runs.
RunMetrics aggregate(std::span<const RunMetrics> runs);

// Stable hex digest of every field that influences training.
std::string config_fingerprint(const TrainConfig& config);

using AugmenterFactory = std::function<Augmenter(const CorpusSplit&, std::uint64_t seed)>;

struct SeedRun {
  std::uint64_t seed = 0;
  TrainResult result;
  double test_accuracy = 0.0;  // of the dev-best parameters
};

// Trains once per split with TrainConfig::seed set to the split's seed and
// scores the dev-best parameters on the split's test set.
std::vector<SeedRun> run_over_splits(const TrainConfig& config, std::span<const CorpusSplit> splits,
                                     const AugmenterFactory& make_augmenter);

struct AblationRow {
  std::string name;
  LossConfig loss;
  RunMetrics metrics;
};

struct AblationReport {
  std::vector<AblationRow> rows;

  // Aligned text table with a footnote on the CON row.
  std::string to_text() const;
  std::string to_json() const;
};

// The base objective plus three variants with one weight zeroed each:
// w/o SCL (lambda1), w/o CC (lambda3), w/o CON (lambda2).
std::vector<AblationRow> ablation_variants(const LossConfig& base);

using AblationProgress = std::function<void(const std::string& row, const SeedRun&)>;
AblationReport ablate(const TrainConfig& base, std::span<const CorpusSplit> splits,
                      const AugmenterFactory& make_augmenter,
                      const AblationProgress& progress = {});

// CSV: header "id,label,z0,...,z{d-1}", one row per example; label is the
// class name or empty. Values use 17 significant digits.
void export_embeddings(const EncoderParams& params, std::span<const Example> examples,
                       const LabelMap& labels, const std::filesystem::path& path);

}  // namespace ftcc
