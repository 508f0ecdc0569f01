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

#include "ftcc/synthetic.hpp"

#include <cmath>

#include "ftcc/error.hpp"
#include "ftcc/rng.hpp"

namespace ftcc {

LabelMap synthetic_labels() { return LabelMap({"topic_a", "topic_b"}); }

namespace {

// Cumulative Zipf weights over n ranks.
std::vector<double> zipf_cdf(std::size_t n, double exponent) {
  std::vector<double> cdf(n);
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    total += 1.0 / std::pow(static_cast<double>(r + 1), exponent);
    cdf[r] = total;
  }
  for (double& c : cdf) c /= total;
  return cdf;
}

std::size_t sample(const std::vector<double>& cdf, SplitMix64& rng) {
  const double u = rng.uniform();
  for (std::size_t i = 0; i < cdf.size(); ++i)
    if (u < cdf[i]) return i;
  return cdf.size() - 1;
}

}  // namespace

std::vector<Example> synthetic_corpus(std::size_t count, std::uint64_t seed,
                                      const SyntheticSpec& spec, const std::string& id_prefix) {
  if (spec.topic_words == 0 || spec.noise_words == 0 || spec.min_tokens == 0 ||
      spec.max_tokens < spec.min_tokens) {
    throw ConfigError("invalid synthetic corpus spec");
  }
  const auto topic_cdf = zipf_cdf(spec.topic_words, spec.zipf);
  const auto noise_cdf = zipf_cdf(spec.noise_words, spec.zipf);
  const char* topic_prefix[2] = {"ta", "tb"};
  SplitMix64 rng(seed);
  std::vector<Example> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int label = static_cast<int>(i % 2);
    const std::size_t len =
        spec.min_tokens + static_cast<std::size_t>(rng.below(spec.max_tokens - spec.min_tokens + 1));
    std::string text;
    for (std::size_t t = 0; t < len; ++t) {
      if (t) text += ' ';
      if (rng.uniform() < spec.noise_rate) {
        text += "nz" + std::to_string(sample(noise_cdf, rng));
      } else {
        text += topic_prefix[label] + std::to_string(sample(topic_cdf, rng));
      }
    }
    out.push_back({id_prefix + std::to_string(i), std::move(text), label});
  }
  return out;
}

}  // namespace ftcc
