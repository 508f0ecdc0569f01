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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ftcc/corpus.hpp"
#include "ftcc/tensor.hpp"

namespace ftcc {

struct EncoderDims {
  std::size_t features = 4096;  // F
  std::size_t hidden = 128;     // h
  std::size_t embed = 32;       // d
  std::size_t classes = 2;      // C

  bool operator==(const EncoderDims&) const = default;
};

struct FeatureVector {
  std::size_t dim = 0;
  std::vector<double> values;  // dense, nonnegative counts
};

// Hashed bag of lowercased whitespace unigrams and adjacent bigrams.
// A unigram's key is the token itself; a bigram's key is "tok1 tok2". Each
// key adds 1 to bucket fnv1a64(key, hash_seed) % dim. When max_tokens > 0
// only the first max_tokens tokens are used.
struct Featurizer {
  std::size_t dim = 4096;
  std::uint64_t hash_seed = 0;
  std::size_t max_tokens = 0;

  FeatureVector operator()(std::string_view text) const;
  std::size_t bucket(std::string_view key) const;

  bool operator==(const Featurizer&) const = default;
};

FeatureVector featurize(std::string_view text, std::size_t dim, std::uint64_t hash_seed = 0);

// Stacks feature vectors into a [B x F] constant tensor.
Tensor feature_matrix(std::span<const FeatureVector> rows);

// 2-layer tanh MLP F -> h -> d plus a linear classifier d -> C on the
// pre-normalization embedding.
struct EncoderParams {
  EncoderDims dims;
  Featurizer featurizer;
  Tensor w1, b1;  // [F x h], [h]
  Tensor w2, b2;  // [h x d], [d]
  Tensor wc, bc;  // [d x C], [C]

  struct Named {
    std::string name;
    Tensor tensor;
    bool is_weight;  // weight matrices get decoupled weight decay
  };
  std::vector<Named> parameters() const;

  // Deep copy with fresh leaves.
  EncoderParams clone() const;
  void zero_grad();
  // Bitwise comparison of dims, featurizer and all values.
  bool identical(const EncoderParams& other) const;
};

// Glorot-uniform weights, zero biases, drawn in order w1, w2, wc from
// SplitMix64(seed).
EncoderParams init_params(std::uint64_t seed, EncoderDims dims, Featurizer featurizer = {});

struct Encoding {
  Tensor embedding;  // pre-normalization [B x d]
  Tensor z;          // unit rows [B x d]
  Tensor logits;     // [B x C]
};

// Rows whose embedding norm is <= 1e-12 are mapped to the constant unit
// vector instead of raising.
Encoding encode(const EncoderParams& params, const Tensor& features);
Encoding encode(const EncoderParams& params, const FeatureVector& fv);
Encoding encode_texts(const EncoderParams& params, std::span<const std::string> texts);

// argmax of the logits per row, lowest index on ties.
std::vector<int> predict(const EncoderParams& params, const Tensor& features);

struct Checkpoint {
  EncoderParams params;
  LabelMap labels;
};

// JSON container: format tag, version, dims, featurizer settings, label
// names and every parameter array. Doubles are written in shortest
// round-trip form, so save/load is bitwise.
void save_checkpoint(const std::filesystem::path& path, const EncoderParams& params,
                     const LabelMap& labels);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ftcc
