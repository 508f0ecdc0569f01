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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ftcc {

struct Example {
  std::string id;
  std::string text;
  std::optional<int> label;

  bool operator==(const Example&) const = default;
};

class LabelMap {
 public:
  LabelMap() = default;
  // Names must be unique and at least two.
  explicit LabelMap(std::vector<std::string> names);

  // Sorted distinct label names found in a dataset file.
  static LabelMap infer(const std::filesystem::path& path);

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(int index) const;
  std::optional<int> find(std::string_view name) const;

 private:
  std::vector<std::string> names_;
};

// Line-delimited JSON: {"text": ..., "label": ..., "id": ...}; only text is
// required. Records without an id get their 0-based record index. Blank
// lines are skipped.
std::vector<Example> load_dataset(const std::filesystem::path& path, const LabelMap& labels);
// Same, from an in-memory document; `source` names it in error messages.
std::vector<Example> parse_dataset(std::string_view content, const LabelMap& labels,
                                   const std::string& source = "<memory>");
void save_dataset(const std::filesystem::path& path, std::span<const Example> examples,
                  const LabelMap& labels);

struct CorpusSplit {
  std::vector<Example> labeled;    // n = K * C, labels present
  std::vector<Example> unlabeled;  // m, labels stripped
  std::vector<Example> dev;
  std::vector<Example> test;
  std::uint64_t seed = 0;
  // True labels of `unlabeled`, index-aligned. Audit sidecar only; the
  // trainer never reads it.
  std::vector<int> unlabeled_truth;
};

struct SplitSizes {
  std::size_t per_class = 10;  // K
  std::size_t unlabeled = 0;   // m
  std::size_t dev = 0;
};

// Stratified split: each class list is shuffled with SplitMix64(seed), the
// first K go to labeled, the next share of m to unlabeled and the next share
// of dev to dev. Unlabeled and dev get an even class distribution: m / C per
// class with the remainder going to the lowest class indices. Each bucket is
// finally shuffled with the same generator.
CorpusSplit make_split(std::span<const Example> data, std::size_t num_classes,
                       const SplitSizes& sizes, std::uint64_t seed,
                       const LabelMap* labels = nullptr);

std::vector<CorpusSplit> three_seed_splits(std::span<const Example> data,
                                           std::size_t num_classes, const SplitSizes& sizes,
                                           std::array<std::uint64_t, 3> seeds,
                                           const LabelMap* labels = nullptr);

// One {"id", "bucket"} record per labeled/unlabeled/dev example.
void write_manifest(const std::filesystem::path& path, const CorpusSplit& split);
// {"id", "label"} per unlabeled example, from the audit sidecar.
void write_unlabeled_truth(const std::filesystem::path& path, const CorpusSplit& split,
                           const LabelMap& labels);

}  // namespace ftcc
