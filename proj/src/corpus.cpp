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

#include "ftcc/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ftcc/error.hpp"
#include "ftcc/io.hpp"
#include "ftcc/rng.hpp"

namespace ftcc {

using ordered_json = nlohmann::ordered_json;

LabelMap::LabelMap(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() < 2) throw SchemaError("label map needs at least two classes");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (!seen.insert(n).second) throw SchemaError("duplicate label name '" + n + "'");
  }
}

const std::string& LabelMap::name(int index) const {
  if (index < 0 || static_cast<std::size_t>(index) >= names_.size()) {
    throw ContractError("label index " + std::to_string(index) + " out of range");
  }
  return names_[static_cast<std::size_t>(index)];
}

std::optional<int> LabelMap::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

LabelMap LabelMap::infer(const std::filesystem::path& path) {
  std::set<std::string> names;
  for_each_json_line(path, [&](const nlohmann::json& rec, std::size_t line) {
    if (!rec.contains("label") || rec["label"].is_null()) return;
    if (!rec["label"].is_string()) {
      throw SchemaError(path.string() + ":" + std::to_string(line) + ": label must be a string");
    }
    names.insert(rec["label"].get<std::string>());
  });
  return LabelMap(std::vector<std::string>(names.begin(), names.end()));
}

namespace {

Example parse_record(const nlohmann::json& rec, std::size_t line, std::size_t index,
                     const LabelMap& labels, const std::string& source) {
  const std::string where = source + ":" + std::to_string(line);
  if (!rec.is_object()) throw ParseError(where + ": record is not a JSON object");
  if (!rec.contains("text") || !rec["text"].is_string()) {
    throw ParseError(where + ": missing string field 'text'");
  }
  Example ex;
  ex.text = rec["text"].get<std::string>();
  if (rec.contains("id") && !rec["id"].is_null()) {
    const auto& id = rec["id"];
    ex.id = id.is_string() ? id.get<std::string>() : id.dump();
  } else {
    ex.id = std::to_string(index);
  }
  if (rec.contains("label") && !rec["label"].is_null()) {
    if (!rec["label"].is_string()) throw SchemaError(where + ": label must be a string");
    const auto name = rec["label"].get<std::string>();
    const auto idx = labels.find(name);
    if (!idx) throw SchemaError(where + ": unknown label '" + name + "'");
    ex.label = *idx;
  }
  return ex;
}

}  // namespace

std::vector<Example> parse_dataset(std::string_view content, const LabelMap& labels,
                                   const std::string& source) {
  std::vector<Example> out;
  for_each_json_line(content, source, [&](const nlohmann::json& rec, std::size_t line) {
    out.push_back(parse_record(rec, line, out.size(), labels, source));
  });
  return out;
}

std::vector<Example> load_dataset(const std::filesystem::path& path, const LabelMap& labels) {
  return parse_dataset(read_file(path), labels, path.string());
}

void save_dataset(const std::filesystem::path& path, std::span<const Example> examples,
                  const LabelMap& labels) {
  std::ostringstream os;
  for (const auto& ex : examples) {
    ordered_json rec;
    rec["id"] = ex.id;
    rec["text"] = ex.text;
    if (ex.label) rec["label"] = labels.name(*ex.label);
    os << rec.dump() << '\n';
  }
  write_file(path, os.str());
}

namespace {

std::string class_name(int c, const LabelMap* labels) {
  if (labels && static_cast<std::size_t>(c) < labels->size()) return "'" + labels->name(c) + "'";
  return std::to_string(c);
}

// Share of `total` assigned to class c under the even-distribution rule.
std::size_t even_share(std::size_t total, std::size_t classes, std::size_t c) {
  return total / classes + (c < total % classes ? 1 : 0);
}

}  // namespace

CorpusSplit make_split(std::span<const Example> data, std::size_t num_classes,
                       const SplitSizes& sizes, std::uint64_t seed, const LabelMap* labels) {
  if (num_classes < 2) throw ConfigError("split needs at least two classes");
  if (sizes.per_class == 0) throw ConfigError("K must be at least 1");
  const std::size_t n = sizes.per_class * num_classes;
  if (n >= sizes.unlabeled) {
    throw ConfigError("labeled count n = " + std::to_string(n) +
                      " must be smaller than unlabeled count m = " +
                      std::to_string(sizes.unlabeled));
  }
  if (n + sizes.unlabeled + sizes.dev > data.size()) {
    throw SplitError("K*C + m + dev = " + std::to_string(n + sizes.unlabeled + sizes.dev) +
                     " exceeds corpus size " + std::to_string(data.size()));
  }

  std::vector<std::vector<std::size_t>> by_class(num_classes);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& ex = data[i];
    if (!ex.label) throw SplitError("example '" + ex.id + "' has no label");
    if (*ex.label < 0 || static_cast<std::size_t>(*ex.label) >= num_classes) {
      throw ContractError("example '" + ex.id + "' label out of range");
    }
    if (!ids.insert(ex.id).second) throw SplitError("duplicate example id '" + ex.id + "'");
    by_class[static_cast<std::size_t>(*ex.label)].push_back(i);
  }

  for (std::size_t c = 0; c < num_classes; ++c) {
    const std::size_t need = sizes.per_class + even_share(sizes.unlabeled, num_classes, c) +
                             even_share(sizes.dev, num_classes, c);
    if (by_class[c].size() < need) {
      throw SplitError("class " + class_name(static_cast<int>(c), labels) + " has " +
                       std::to_string(by_class[c].size()) + " examples, needs " +
                       std::to_string(need));
    }
  }

  SplitMix64 rng(seed);
  CorpusSplit split;
  split.seed = seed;
  std::vector<std::size_t> labeled, unlabeled, dev;
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& pool = by_class[c];
    rng.shuffle(std::span(pool));
    auto it = pool.begin();
    const auto take = [&](std::vector<std::size_t>& dst, std::size_t count) {
      dst.insert(dst.end(), it, it + static_cast<std::ptrdiff_t>(count));
      it += static_cast<std::ptrdiff_t>(count);
    };
    take(labeled, sizes.per_class);
    take(unlabeled, even_share(sizes.unlabeled, num_classes, c));
    take(dev, even_share(sizes.dev, num_classes, c));
  }
  rng.shuffle(std::span(labeled));
  rng.shuffle(std::span(unlabeled));
  rng.shuffle(std::span(dev));

  for (std::size_t i : labeled) split.labeled.push_back(data[i]);
  for (std::size_t i : dev) split.dev.push_back(data[i]);
  for (std::size_t i : unlabeled) {
    Example ex = data[i];
    split.unlabeled_truth.push_back(*ex.label);
    ex.label.reset();
    split.unlabeled.push_back(std::move(ex));
  }
  return split;
}

std::vector<CorpusSplit> three_seed_splits(std::span<const Example> data,
                                           std::size_t num_classes, const SplitSizes& sizes,
                                           std::array<std::uint64_t, 3> seeds,
                                           const LabelMap* labels) {
  if (seeds[0] == seeds[1] || seeds[0] == seeds[2] || seeds[1] == seeds[2]) {
    throw ConfigError("split seeds must be distinct");
  }
  std::vector<CorpusSplit> out;
  for (auto s : seeds) out.push_back(make_split(data, num_classes, sizes, s, labels));
  return out;
}

void write_manifest(const std::filesystem::path& path, const CorpusSplit& split) {
  std::ostringstream os;
  const auto emit = [&](const std::vector<Example>& bucket, const char* name) {
    for (const auto& ex : bucket) {
      ordered_json rec;
      rec["id"] = ex.id;
      rec["bucket"] = name;
      os << rec.dump() << '\n';
    }
  };
  emit(split.labeled, "labeled");
  emit(split.unlabeled, "unlabeled");
  emit(split.dev, "dev");
  write_file(path, os.str());
}

void write_unlabeled_truth(const std::filesystem::path& path, const CorpusSplit& split,
                           const LabelMap& labels) {
  std::ostringstream os;
  for (std::size_t i = 0; i < split.unlabeled.size(); ++i) {
    ordered_json rec;
    rec["id"] = split.unlabeled[i].id;
    rec["label"] = labels.name(split.unlabeled_truth.at(i));
    os << rec.dump() << '\n';
  }
  write_file(path, os.str());
}

}  // namespace ftcc
