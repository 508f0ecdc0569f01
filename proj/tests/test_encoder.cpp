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

#include "ftcc/encoder.hpp"
#include "ftcc/error.hpp"
#include "ftcc/gradcheck.hpp"
#include "ftcc/hash.hpp"
#include "ftcc/io.hpp"
#include "support.hpp"

using namespace ftcc;

namespace {

double total(const FeatureVector& fv) {
  double s = 0;
  for (double v : fv.values) s += v;
  return s;
}

// Bucket of a key computed directly from the FNV-1a definition.
std::size_t fnv_bucket(std::string_view key, std::size_t dim) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : key) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return static_cast<std::size_t>(h % dim);
}

}  // namespace

TEST_CASE("featurize counts") {
  CHECK(total(featurize("", 64)) == 0.0);
  CHECK(total(featurize("   ", 64)) == 0.0);

  const auto aa = featurize("a a", 1 << 16);
  CHECK(total(aa) == 3.0);  // two unigrams and one bigram
  CHECK(aa.values[fnv_bucket("a", 1 << 16)] == 2.0);
  CHECK(aa.values[fnv_bucket("a a", 1 << 16)] == 1.0);

  const auto ab = featurize("a b", 1 << 16);
  const auto ba = featurize("B  a", 1 << 16);
  CHECK(ab.values[fnv_bucket("a", 1 << 16)] == ba.values[fnv_bucket("a", 1 << 16)]);
  CHECK(ab.values != ba.values);  // bigrams differ
  CHECK(ba.values[fnv_bucket("b a", 1 << 16)] == 1.0);
}

TEST_CASE("featurizer truncation and seeds") {
  Featurizer f{256, 0, 2};
  CHECK(total(f("one two three four")) == 3.0);
  Featurizer g{1 << 16, 5, 0};
  CHECK(g.bucket("a") == static_cast<std::size_t>(fnv1a64("a", 5) % (1 << 16)));
  CHECK(g.bucket("a") != Featurizer{1 << 16, 0, 0}.bucket("a"));
}

TEST_CASE("init is deterministic with zero biases and Glorot bounds") {
  const EncoderDims dims{50, 7, 4, 3};
  const auto a = init_params(9, dims, {50, 0, 0});
  const auto b = init_params(9, dims, {50, 0, 0});
  const auto c = init_params(10, dims, {50, 0, 0});
  CHECK(a.identical(b));
  CHECK_FALSE(a.identical(c));
  for (const auto& p : a.parameters()) {
    INFO(p.name);
    if (!p.is_weight) {
      for (double v : p.tensor.data()) CHECK(v == 0.0);
      continue;
    }
    const double bound = std::sqrt(6.0 / static_cast<double>(p.tensor.rows() + p.tensor.cols()));
    double lo = 1, hi = -1;
    for (double v : p.tensor.data()) {
      CHECK(std::abs(v) <= bound);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(hi - lo > bound);  // values actually spread over the range
  }
}

TEST_CASE("encode produces unit embeddings") {
  const EncoderDims dims{128, 16, 6, 2};
  const auto params = init_params(1, dims, {128, 0, 0});
  const std::vector<std::string> texts{"the cat", "a dog ran fast", "", "x y z"};
  const auto enc = encode_texts(params, texts);
  CHECK(enc.z.shape() == Shape{4, 6});
  CHECK(enc.logits.shape() == Shape{4, 2});
  for (std::size_t r = 0; r < 4; ++r) {
    double s = 0;
    for (std::size_t c = 0; c < 6; ++c) s += enc.z.at(r, c) * enc.z.at(r, c);
    CHECK(std::abs(std::sqrt(s) - 1.0) <= 1e-10);
  }
}

TEST_CASE("zero features with nonzero biases") {
  const EncoderDims dims{32, 5, 3, 2};
  auto params = init_params(2, dims, {32, 0, 0});
  auto b2 = params.b2.mutable_data();
  b2[0] = 0.5;
  b2[2] = -1.0;
  const auto enc = encode(params, featurize("", 32));
  CHECK(enc.z.at(0) == doctest::Approx(0.5 / std::sqrt(1.25)));
  CHECK(enc.z.at(2) == doctest::Approx(-1.0 / std::sqrt(1.25)));

  // All-zero pre-normalization embedding: no error, still unit norm.
  const auto zero_params = init_params(2, dims, {32, 0, 0});
  const auto flat = encode(zero_params, featurize("", 32));
  double s = 0;
  for (double v : flat.z.data()) s += v * v;
  CHECK(std::abs(s - 1.0) <= 1e-12);
}

TEST_CASE("logits ignore constant shifts through softmax") {
  const auto params = init_params(3, {64, 8, 4, 3}, {64, 0, 0});
  const auto enc = encode(params, featurize("shift test", 64));
  std::vector<double> shifted(enc.logits.data().begin(), enc.logits.data().end());
  for (auto& v : shifted) v += 17.5;
  const auto a = softmax(enc.logits);
  const auto b = softmax(Tensor::from(enc.logits.shape(), shifted));
  CHECK(testing::max_abs_diff(a.data(), b.data()) <= 1e-12);
}

TEST_CASE("encoder gradients match finite differences") {
  const EncoderDims dims{24, 5, 4, 3};
  auto params = init_params(4, dims, {24, 0, 0});
  SplitMix64 rng(4);
  for (auto& p : params.parameters()) {
    if (!p.is_weight) {
      auto v = p.tensor.mutable_data();
      for (auto& x : v) x = rng.uniform() - 0.5;
    }
  }
  const std::vector<FeatureVector> fvs{featurize("a b c", 24), featurize("b d", 24),
                                       featurize("e e f g", 24)};
  const Tensor x = feature_matrix(fvs);
  std::vector<Tensor> leaves;
  for (const auto& p : params.parameters()) leaves.push_back(p.tensor);
  const auto wz = testing::uniform(rng, 12), wl = testing::uniform(rng, 9);
  auto r = check_gradients(
      [&] {
        const auto enc = encode(params, x);
        return add(weighted_sum(enc.z, wz), weighted_sum(enc.logits, wl));
      },
      leaves);
  CHECK(r.max_rel_error <= 1e-4);
  auto logits_only = check_gradients(
      [&] { return weighted_sum(encode(params, x).logits, wl); }, leaves);
  CHECK(logits_only.max_rel_error <= 1e-4);
}

TEST_CASE("predict takes the lowest index on ties") {
  const EncoderDims dims{16, 4, 3, 3};
  auto params = init_params(5, dims, {16, 0, 0});
  for (auto& v : params.wc.mutable_data()) v = 0.0;
  auto bc = params.bc.mutable_data();
  bc[1] = 1.0;
  bc[2] = 1.0;
  const auto pred = predict(params, feature_matrix(std::vector<FeatureVector>{featurize("q", 16)}));
  CHECK(pred == std::vector<int>{1});
}

TEST_CASE("checkpoint round trip is bitwise") {
  const auto dir = oracle::scratch("encoder_ckpt");
  auto params = init_params(6, {40, 6, 3, 2}, {40, 3, 5});
  params.b1.mutable_data()[0] = 0.1 + 0.2;  // not representable in short decimal
  params.w2.mutable_data()[1] = -1e-300;
  const LabelMap labels({"neg", "pos"});
  save_checkpoint(dir / "ckpt.json", params, labels);
  const auto back = load_checkpoint(dir / "ckpt.json");
  CHECK(back.params.identical(params));
  CHECK(back.labels.names() == labels.names());
  CHECK(back.params.featurizer == params.featurizer);

  write_file(dir / "bad.json", "{\"format\": \"other\"}");
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.json"), Error);
}
