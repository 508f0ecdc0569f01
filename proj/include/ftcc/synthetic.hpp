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

// Two-topic toy corpus for end-to-end checks. Each class owns a disjoint
// topic vocabulary; every token is drawn from a shared noise vocabulary with
// probability noise_rate and from the document's topic vocabulary otherwise.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ftcc/corpus.hpp"

namespace ftcc {

struct SyntheticSpec {
  std::size_t topic_words = 50;  // per class
  std::size_t noise_words = 50;  // shared
  double noise_rate = 0.2;
  std::size_t min_tokens = 2;
  std::size_t max_tokens = 4;
  // Zipf exponent over each vocabulary (0 draws uniformly).
  double zipf = 0.0;
};

LabelMap synthetic_labels();

// `count` examples, classes alternating so the corpus is balanced. Ids are
// id_prefix followed by the example index.
std::vector<Example> synthetic_corpus(std::size_t count, std::uint64_t seed,
                                      const SyntheticSpec& spec = {},
                                      const std::string& id_prefix = "s");

}  // namespace ftcc
