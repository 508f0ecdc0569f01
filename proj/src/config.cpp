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

#include "ftcc/config.hpp"

#include <algorithm>
#include <charconv>
#include <iterator>
#include <cmath>
#include <sstream>

#include "ftcc/error.hpp"
#include "ftcc/io.hpp"

namespace ftcc {

const std::vector<ConfigKey> kKnownKeys = {
    {"data", "", "line-delimited JSON training pool"},
    {"test", "", "line-delimited JSON test set"},
    {"labels", "", "comma-separated class names; inferred (sorted) when empty"},
    {"K", "10", "labeled examples per class"},
    {"unlabeled", "500", "unlabeled pool size m"},
    {"dev", "200", "dev set size"},
    {"max_length", "0", "keep only the first N tokens (0 keeps all)"},
    {"labeled_batch", "8", ""},
    {"unlabeled_batch", "32", ""},
    {"learning_rate", "0.003", "peak learning rate"},
    {"max_step", "400", "total optimizer steps T"},
    {"scl_temperature", "0.1", ""},
    {"cc_temperature", "0.1", ""},
    {"warmup_percent", "0.1", ""},
    {"weight_decay", "0.01", ""},
    {"adam_beta1", "0.9", ""},
    {"adam_beta2", "0.999", ""},
    {"adam_eps", "1e-08", ""},
    {"F", "4096", "hashed feature dimension"},
    {"h", "128", "hidden width"},
    {"d", "32", "embedding dimension"},
    {"hash_seed", "0", "FNV-1a seed"},
    {"seed", "1", "split and training seed"},
    {"lambda1", "1", "weight of the supervised contrastive loss"},
    {"lambda2", "1", "weight of the consistency loss"},
    {"lambda3", "1", "weight of the contrastive consistency loss"},
    {"cc_stop_gradient", "true", "detach the original view in the cc loss"},
    {"augmentation", "noise", "noise | external"},
    {"paired", "", "paired augmentation file for augmentation = external"},
    {"drop_prob", "0.1", "lexical noise token drop probability"},
    {"swap_prob", "0.1", "lexical noise adjacent swap probability"},
    {"eval_every", "0", "dev evaluation period in steps (0: T / 20)"},
};

namespace {

constexpr const char* kPathKeys[] = {"data", "test", "paired"};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& k : kKnownKeys) values_.emplace(std::string(k.name), std::string(k.default_value));
}

void RunConfig::set(std::string_view key, std::string_view value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  it->second = std::string(value);
}

void RunConfig::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

RunConfig RunConfig::parse(std::string_view text, const std::string& source) {
  RunConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      cfg.apply_override(line);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  RunConfig cfg = parse(read_file(path), path.string());
  // Relative data paths are taken from the config file's directory.
  for (const char* key : kPathKeys) {
    const std::filesystem::path p = cfg.get(key);
    if (!p.empty() && p.is_relative()) {
      cfg.values_[key] = (path.parent_path() / p).lexically_normal().string();
    }
  }
  return cfg;
}

const std::string& RunConfig::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  return it->second;
}

double RunConfig::get_double(std::string_view key) const {
  const std::string& s = get(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + std::string(key) + "': '" + s + "' is not a number");
  }
}

std::int64_t RunConfig::get_int(std::string_view key) const {
  const std::string& s = get(key);
  std::int64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigError("config key '" + std::string(key) + "': '" + s + "' is not an integer");
  }
  return v;
}

std::uint64_t RunConfig::get_uint(std::string_view key) const {
  const std::string& s = get(key);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigError("config key '" + std::string(key) + "': '" + s +
                      "' is not a nonnegative integer");
  }
  return v;
}

bool RunConfig::get_bool(std::string_view key) const {
  const std::string& s = get(key);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("config key '" + std::string(key) + "': '" + s + "' is not a boolean");
}

std::optional<std::filesystem::path> RunConfig::get_path(std::string_view key) const {
  const std::string& s = get(key);
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

std::string RunConfig::resolved() const {
  std::ostringstream os;
  for (const auto& [k, v] : values_) {
    const bool is_path = std::find(std::begin(kPathKeys), std::end(kPathKeys), std::string_view(k)) != std::end(kPathKeys);
    if (is_path && !v.empty()) {
      os << k << " = " << std::filesystem::absolute(v).lexically_normal().string() << '\n';
    } else {
      os << k << " = " << v << '\n';
    }
  }
  return os.str();
}

TrainConfig RunConfig::train_config(std::size_t num_classes) const {
  TrainConfig c;
  c.max_steps = get_uint("max_step");
  c.labeled_batch = get_uint("labeled_batch");
  c.unlabeled_batch = get_uint("unlabeled_batch");
  c.peak_lr = get_double("learning_rate");
  c.warmup_fraction = get_double("warmup_percent");
  c.weight_decay = get_double("weight_decay");
  c.loss.tau_scl = get_double("scl_temperature");
  c.loss.tau_cc = get_double("cc_temperature");
  c.loss.lambda1 = get_double("lambda1");
  c.loss.lambda2 = get_double("lambda2");
  c.loss.lambda3 = get_double("lambda3");
  c.loss.cc_stop_gradient = get_bool("cc_stop_gradient");
  c.adam = {get_double("adam_beta1"), get_double("adam_beta2"), get_double("adam_eps")};
  c.seed = get_uint("seed");
  c.dims = {get_uint("F"), get_uint("h"), get_uint("d"), num_classes};
  c.featurizer = {c.dims.features, get_uint("hash_seed"), get_uint("max_length")};
  c.eval_every = get_uint("eval_every");
  c.validate();
  return c;
}

SplitSizes RunConfig::split_sizes() const {
  return {get_uint("K"), get_uint("unlabeled"), get_uint("dev")};
}

NoiseOptions RunConfig::noise_options() const {
  return {get_double("drop_prob"), get_double("swap_prob")};
}

AugmentSource RunConfig::augment_source() const {
  const std::string& mode = get("augmentation");
  if (mode == "noise") return AugmentSource::kLexicalNoise;
  if (mode == "external") return AugmentSource::kExternal;
  throw ConfigError("augmentation must be 'noise' or 'external', got '" + mode + "'");
}

}  // namespace ftcc
