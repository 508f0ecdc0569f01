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

#include "ftcc/augment.hpp"

#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "ftcc/error.hpp"
#include "ftcc/hash.hpp"
#include "ftcc/io.hpp"
#include "ftcc/rng.hpp"
#include "ftcc/text.hpp"

namespace ftcc {

std::string lexical_noise(std::string_view text, double drop_prob, double swap_prob,
                          std::uint64_t seed) {
  if (!(drop_prob >= 0.0 && drop_prob <= 1.0) || !(swap_prob >= 0.0 && swap_prob <= 1.0)) {
    throw ContractError("lexical_noise: probabilities must lie in [0, 1]");
  }
  std::vector<std::string_view> tokens = split_whitespace(text);
  if (tokens.empty()) return std::string(text);

  SplitMix64 rng(seed ^ fnv1a64(text));
  bool changed = false;
  std::vector<std::string_view> kept;
  kept.reserve(tokens.size());
  for (auto tok : tokens) {
    if (rng.uniform() < drop_prob) {
      changed = true;
    } else {
      kept.push_back(tok);
    }
  }
  if (kept.empty()) kept.push_back(tokens[rng.below(tokens.size())]);

  for (std::size_t i = 0; i + 1 < kept.size();) {
    if (rng.uniform() < swap_prob) {
      std::swap(kept[i], kept[i + 1]);
      changed = true;
      i += 2;
    } else {
      i += 1;
    }
  }
  if (!changed) return std::string(text);

  std::string out;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (i) out += ' ';
    out += kept[i];
  }
  return out;
}

std::vector<AugmentedPair> load_paired(const std::filesystem::path& path,
                                       std::span<const Example> unlabeled) {
  std::unordered_map<std::string_view, std::size_t> by_id, by_text;
  for (std::size_t i = 0; i < unlabeled.size(); ++i) {
    by_id.emplace(unlabeled[i].id, i);
    by_text.emplace(unlabeled[i].text, i);  // first occurrence wins
  }

  std::vector<AugmentedPair> pairs;
  std::vector<std::string> offenders;
  for_each_json_line(path, [&](const nlohmann::json& rec, std::size_t line) {
    const std::string where = path.string() + ":" + std::to_string(line);
    if (!rec.is_object() || !rec.contains("text") || !rec["text"].is_string() ||
        !rec.contains("aug") || !rec["aug"].is_string()) {
      throw ParseError(where + ": record needs string fields 'text' and 'aug'");
    }
    const auto text = rec["text"].get<std::string>();
    std::optional<std::size_t> match;
    std::string label = "line " + std::to_string(line);
    if (rec.contains("id") && !rec["id"].is_null()) {
      const std::string id = rec["id"].is_string() ? rec["id"].get<std::string>() : rec["id"].dump();
      label += " (id " + id + ")";
      if (auto it = by_id.find(id); it != by_id.end()) match = it->second;
    } else if (auto it = by_text.find(text); it != by_text.end()) {
      match = it->second;
    }
    if (!match) {
      offenders.push_back(label);
      return;
    }
    pairs.push_back({unlabeled[*match], rec["aug"].get<std::string>(), AugmentSource::kExternal});
  });
  if (!offenders.empty()) {
    std::string msg = path.string() + ": " + std::to_string(offenders.size()) +
                      " record(s) match no unlabeled example:";
    for (const auto& o : offenders) msg += " " + o + ";";
    throw LinkageError(msg);
  }
  return pairs;
}

void save_paired(const std::filesystem::path& path, std::span<const AugmentedPair> pairs) {
  std::ostringstream os;
  for (const auto& p : pairs) {
    nlohmann::ordered_json rec;
    rec["id"] = p.original.id;
    rec["text"] = p.original.text;
    rec["aug"] = p.augmented_text;
    os << rec.dump() << '\n';
  }
  write_file(path, os.str());
}

Augmenter Augmenter::lexical(NoiseOptions options, std::uint64_t base_seed) {
  if (!(options.drop_prob >= 0.0 && options.drop_prob <= 1.0) ||
      !(options.swap_prob >= 0.0 && options.swap_prob <= 1.0)) {
    throw ConfigError("noise probabilities must lie in [0, 1]");
  }
  Augmenter a;
  a.source_ = AugmentSource::kLexicalNoise;
  a.options_ = options;
  a.base_seed_ = base_seed;
  return a;
}

Augmenter Augmenter::external(std::span<const AugmentedPair> pairs,
                              std::span<const Example> unlabeled) {
  Augmenter a;
  a.source_ = AugmentSource::kExternal;
  for (const auto& p : pairs) a.by_id_.emplace(p.original.id, p.augmented_text);
  std::vector<std::string> missing;
  for (const auto& ex : unlabeled) {
    if (!a.by_id_.contains(ex.id)) missing.push_back(ex.id);
  }
  if (!missing.empty()) {
    std::string msg = std::to_string(missing.size()) + " unlabeled example(s) have no pair:";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
    if (missing.size() > 20) msg += " ...";
    throw LinkageError(msg);
  }
  return a;
}

std::string Augmenter::augment(const Example& example, std::size_t epoch) const {
  if (source_ == AugmentSource::kExternal) {
    auto it = by_id_.find(example.id);
    if (it == by_id_.end()) throw LinkageError("no augmentation for example '" + example.id + "'");
    return it->second;
  }
  return lexical_noise(example.text, options_.drop_prob, options_.swap_prob,
                       base_seed_ + static_cast<std::uint64_t>(epoch));
}

}  // namespace ftcc
