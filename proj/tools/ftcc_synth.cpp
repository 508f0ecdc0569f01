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

// Writes the two-topic toy corpus as line-delimited JSON.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "ftcc/corpus.hpp"
#include "ftcc/error.hpp"
#include "ftcc/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic two-topic corpus"};
  std::string out_dir = ".";
  std::size_t train_count = 1000, test_count = 500;
  std::uint64_t seed = 11;
  ftcc::SyntheticSpec spec;
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--train", train_count, "training pool size");
  app.add_option("--test", test_count, "test set size");
  app.add_option("--seed", seed, "generator seed; the test set uses seed + 1");
  app.add_option("--min-tokens", spec.min_tokens);
  app.add_option("--max-tokens", spec.max_tokens);
  app.add_option("--noise-rate", spec.noise_rate);
  app.add_option("--zipf", spec.zipf, "Zipf exponent (0 draws uniformly)");
  CLI11_PARSE(app, argc, argv);

  try {
    std::filesystem::create_directories(out_dir);
    const auto labels = ftcc::synthetic_labels();
    const auto pool = ftcc::synthetic_corpus(train_count, seed, spec, "train-");
    const auto test = ftcc::synthetic_corpus(test_count, seed + 1, spec, "test-");
    ftcc::save_dataset(std::filesystem::path(out_dir) / "train.jsonl", pool, labels);
    ftcc::save_dataset(std::filesystem::path(out_dir) / "test.jsonl", test, labels);
  } catch (const ftcc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
