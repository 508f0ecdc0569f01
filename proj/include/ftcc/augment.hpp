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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ftcc/corpus.hpp"

namespace ftcc {

enum class AugmentSource { kLexicalNoise, kExternal };

struct AugmentedPair {
  Example original;
  std::string augmented_text;
  AugmentSource source = AugmentSource::kExternal;
};

// Offline paraphrase stand-in. Whitespace tokens are dropped independently
// with `drop_prob`; if every token would be dropped, one uniformly chosen
// token survives. Then, scanning left to right, each adjacent pair is
// swapped with `swap_prob` (a swapped pair is skipped as a unit). Tokens
// are re-joined with single spaces. When nothing is dropped or swapped the
// input is returned unchanged. The generator is seeded from `seed` and a
// hash of the text, so output is a pure function of (text, seed).
std::string lexical_noise(std::string_view text, double drop_prob, double swap_prob,
                          std::uint64_t seed);

// Paired file: line-delimited {"id", "text", "aug"}. A record with an id is
// linked to the unlabeled example with that id; otherwise to the first one
// with byte-identical text. Unlinkable records raise one LinkageError that
// lists all of them.
std::vector<AugmentedPair> load_paired(const std::filesystem::path& path,
                                       std::span<const Example> unlabeled);
void save_paired(const std::filesystem::path& path, std::span<const AugmentedPair> pairs);

struct NoiseOptions {
  double drop_prob = 0.1;
  double swap_prob = 0.1;
};

// The augmentation channel a(x) used by the trainer. Lexical noise is
// resampled every epoch with seed base_seed + epoch; external pairs are fixed.
class Augmenter {
 public:
  static Augmenter lexical(NoiseOptions options, std::uint64_t base_seed);
  // Every example in `unlabeled` must have a pair, else LinkageError.
  static Augmenter external(std::span<const AugmentedPair> pairs,
                            std::span<const Example> unlabeled);

  AugmentSource source() const noexcept { return source_; }
  std::string augment(const Example& example, std::size_t epoch) const;

 private:
  AugmentSource source_ = AugmentSource::kLexicalNoise;
  NoiseOptions options_;
  std::uint64_t base_seed_ = 0;
  std::unordered_map<std::string, std::string> by_id_;
};

}  // namespace ftcc
