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

// Flat key = value run configuration. Keys mirror the usual hyperparameter
// table (max_length, labeled_batch, unlabeled_batch, learning_rate,
// max_step, scl_temperature, cc_temperature, warmup_percent, weight_decay)
// plus the data, model and augmentation keys listed in kKnownKeys.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ftcc/augment.hpp"
#include "ftcc/corpus.hpp"
#include "ftcc/trainer.hpp"

namespace ftcc {

struct ConfigKey {
  std::string_view name;
  std::string_view default_value;
  std::string_view help;
};

extern const std::vector<ConfigKey> kKnownKeys;

class RunConfig {
 public:
  // All known keys at their defaults.
  RunConfig();

  // Lines "key = value"; '#' starts a comment. Unknown keys throw ConfigError.
  static RunConfig parse(std::string_view text, const std::string& source = "<config>");
  static RunConfig load(const std::filesystem::path& path);

  // Throws ConfigError for unknown keys.
  void set(std::string_view key, std::string_view value);
  // "key=value" form used by --set.
  void apply_override(std::string_view assignment);

  const std::string& get(std::string_view key) const;
  double get_double(std::string_view key) const;
  std::int64_t get_int(std::string_view key) const;
  std::uint64_t get_uint(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  std::optional<std::filesystem::path> get_path(std::string_view key) const;

  // Sorted "key = value" lines, loadable with parse().
  std::string resolved() const;

  TrainConfig train_config(std::size_t num_classes) const;
  SplitSizes split_sizes() const;
  NoiseOptions noise_options() const;
  AugmentSource augment_source() const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace ftcc
