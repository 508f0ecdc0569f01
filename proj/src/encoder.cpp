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

#include "ftcc/encoder.hpp"

#include <cmath>
#include <cstring>

#include <json.hpp>

#include "ftcc/error.hpp"
#include "ftcc/hash.hpp"
#include "ftcc/io.hpp"
#include "ftcc/rng.hpp"
#include "ftcc/text.hpp"

namespace ftcc {

namespace {
constexpr const char* kCheckpointFormat = "ftcc-checkpoint";
constexpr int kCheckpointVersion = 1;
}  // namespace

std::size_t Featurizer::bucket(std::string_view key) const {
  return static_cast<std::size_t>(fnv1a64(key, hash_seed) % dim);
}

FeatureVector Featurizer::operator()(std::string_view text) const {
  if (dim < 2) throw ContractError("featurize: dimension must be at least 2");
  FeatureVector fv{dim, std::vector<double>(dim, 0.0)};
  auto views = split_whitespace(text);
  if (max_tokens > 0 && views.size() > max_tokens) views.resize(max_tokens);
  std::vector<std::string> tokens;
  tokens.reserve(views.size());
  for (auto v : views) tokens.push_back(ascii_lower(v));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    fv.values[bucket(tokens[i])] += 1.0;
    if (i + 1 < tokens.size()) fv.values[bucket(tokens[i] + ' ' + tokens[i + 1])] += 1.0;
  }
  return fv;
}

FeatureVector featurize(std::string_view text, std::size_t dim, std::uint64_t hash_seed) {
  return Featurizer{dim, hash_seed, 0}(text);
}

Tensor feature_matrix(std::span<const FeatureVector> rows) {
  if (rows.empty()) throw ContractError("feature_matrix: no rows");
  const std::size_t dim = rows.front().dim;
  std::vector<double> data;
  data.reserve(rows.size() * dim);
  for (const auto& fv : rows) {
    if (fv.dim != dim || fv.values.size() != dim) {
      throw DimensionError("feature_matrix: mixed feature dimensions");
    }
    data.insert(data.end(), fv.values.begin(), fv.values.end());
  }
  return Tensor::from({rows.size(), dim}, std::move(data));
}

std::vector<EncoderParams::Named> EncoderParams::parameters() const {
  return {{"w1", w1, true}, {"b1", b1, false}, {"w2", w2, true},
          {"b2", b2, false}, {"wc", wc, true}, {"bc", bc, false}};
}

EncoderParams EncoderParams::clone() const {
  EncoderParams out;
  out.dims = dims;
  out.featurizer = featurizer;
  out.w1 = w1.detach_copy();
  out.b1 = b1.detach_copy();
  out.w2 = w2.detach_copy();
  out.b2 = b2.detach_copy();
  out.wc = wc.detach_copy();
  out.bc = bc.detach_copy();
  return out;
}

void EncoderParams::zero_grad() {
  for (auto& p : parameters()) p.tensor.zero_grad();
}

bool EncoderParams::identical(const EncoderParams& other) const {
  if (!(dims == other.dims) || !(featurizer == other.featurizer)) return false;
  const auto a = parameters();
  const auto b = other.parameters();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto x = a[i].tensor.data();
    const auto y = b[i].tensor.data();
    if (a[i].tensor.shape() != b[i].tensor.shape()) return false;
    if (std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) != 0) return false;
  }
  return true;
}

EncoderParams init_params(std::uint64_t seed, EncoderDims dims, Featurizer featurizer) {
  if (dims.features < 1 || dims.hidden < 1 || dims.embed < 1 || dims.classes < 1) {
    throw ConfigError("encoder dimensions must be at least 1");
  }
  if (featurizer.dim != dims.features) {
    throw ConfigError("featurizer dimension " + std::to_string(featurizer.dim) +
                      " differs from encoder input " + std::to_string(dims.features));
  }
  SplitMix64 rng(seed);
  const auto glorot = [&](std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::vector<double> w(fan_in * fan_out);
    for (double& v : w) v = (2.0 * rng.uniform() - 1.0) * limit;
    return Tensor::parameter({fan_in, fan_out}, std::move(w));
  };
  const auto zeros = [](std::size_t n) { return Tensor::parameter({n}, std::vector<double>(n)); };

  EncoderParams p;
  p.dims = dims;
  p.featurizer = featurizer;
  p.w1 = glorot(dims.features, dims.hidden);
  p.b1 = zeros(dims.hidden);
  p.w2 = glorot(dims.hidden, dims.embed);
  p.b2 = zeros(dims.embed);
  p.wc = glorot(dims.embed, dims.classes);
  p.bc = zeros(dims.classes);
  return p;
}

Encoding encode(const EncoderParams& params, const Tensor& features) {
  if (features.rank() != 2 || features.shape()[1] != params.dims.features) {
    throw DimensionError("encode: features " + shape_string(features.shape()) +
                         " do not match F = " + std::to_string(params.dims.features));
  }
  Tensor hidden = tanh(add_row_bias(matmul(features, params.w1), params.b1));
  Encoding out;
  out.embedding = add_row_bias(matmul(hidden, params.w2), params.b2);
  out.z = l2_normalize(out.embedding, Degenerate::kFallback);
  out.logits = add_row_bias(matmul(out.embedding, params.wc), params.bc);
  return out;
}

Encoding encode(const EncoderParams& params, const FeatureVector& fv) {
  if (fv.dim != params.dims.features) {
    throw DimensionError("encode: feature dim " + std::to_string(fv.dim) + " != F = " +
                         std::to_string(params.dims.features));
  }
  return encode(params, feature_matrix(std::span(&fv, 1)));
}

Encoding encode_texts(const EncoderParams& params, std::span<const std::string> texts) {
  std::vector<FeatureVector> rows;
  rows.reserve(texts.size());
  for (const auto& t : texts) rows.push_back(params.featurizer(t));
  return encode(params, feature_matrix(rows));
}

std::vector<int> predict(const EncoderParams& params, const Tensor& features) {
  const Tensor logits = encode(params, features).logits;
  const std::size_t c = logits.cols();
  const auto v = logits.data();
  std::vector<int> out(logits.rows());
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < c; ++j)
      if (v[i * c + j] > v[i * c + best]) best = j;
    out[i] = static_cast<int>(best);
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const EncoderParams& params,
                     const LabelMap& labels) {
  nlohmann::ordered_json doc;
  doc["format"] = kCheckpointFormat;
  doc["version"] = kCheckpointVersion;
  doc["dims"] = {{"F", params.dims.features},
                 {"h", params.dims.hidden},
                 {"d", params.dims.embed},
                 {"C", params.dims.classes}};
  doc["hash_seed"] = params.featurizer.hash_seed;
  doc["max_length"] = params.featurizer.max_tokens;
  doc["labels"] = labels.names();
  nlohmann::ordered_json arrays;
  for (const auto& p : params.parameters()) {
    const auto values = p.tensor.data();
    arrays[p.name] = {{"shape", p.tensor.shape()},
                      {"data", std::vector<double>(values.begin(), values.end())}};
  }
  doc["params"] = std::move(arrays);
  write_file(path, doc.dump() + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": malformed checkpoint (" + e.what() + ")");
  }
  try {
    if (doc.at("format") != kCheckpointFormat) throw SchemaError("not an ftcc checkpoint");
    if (doc.at("version") != kCheckpointVersion) {
      throw SchemaError("unsupported checkpoint version " + doc.at("version").dump());
    }
    const auto& d = doc.at("dims");
    EncoderDims dims{d.at("F").get<std::size_t>(), d.at("h").get<std::size_t>(),
                     d.at("d").get<std::size_t>(), d.at("C").get<std::size_t>()};
    Featurizer fz{dims.features, doc.at("hash_seed").get<std::uint64_t>(),
                  doc.at("max_length").get<std::size_t>()};
    Checkpoint ck{init_params(0, dims, fz),
                  LabelMap(doc.at("labels").get<std::vector<std::string>>())};
    if (ck.labels.size() != dims.classes) {
      throw SchemaError("label count does not match class dimension");
    }
    for (auto& p : ck.params.parameters()) {
      const auto& arr = doc.at("params").at(p.name);
      if (arr.at("shape").get<Shape>() != p.tensor.shape()) {
        throw SchemaError("parameter '" + p.name + "' has shape " + arr.at("shape").dump());
      }
      const auto values = arr.at("data").get<std::vector<double>>();
      if (values.size() != p.tensor.size()) {
        throw SchemaError("parameter '" + p.name + "' has the wrong element count");
      }
      auto dst = p.tensor.mutable_data();
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) throw SchemaError("parameter '" + p.name + "' not finite");
        dst[i] = values[i];
      }
    }
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": bad checkpoint (" + e.what() + ")");
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

}  // namespace ftcc
