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
#include <fstream>
#include <sstream>

#include "ftcc/error.hpp"
#include "ftcc/eval.hpp"
#include "ftcc/io.hpp"
#include "ftcc/synthetic.hpp"
#include "oracles.hpp"

using namespace ftcc;

namespace {

// Classifier that always prefers class `c` regardless of input.
EncoderParams constant_model(int c) {
  auto p = init_params(1, {32, 4, 3, 2}, {32, 0, 0});
  for (auto& v : p.wc.mutable_data()) v = 0.0;
  p.bc.mutable_data()[static_cast<std::size_t>(c)] = 1.0;
  return p;
}

std::vector<Example> labeled(const std::vector<int>& ys) {
  std::vector<Example> out;
  for (std::size_t i = 0; i < ys.size(); ++i) out.push_back({std::to_string(i), "w" + std::to_string(i), ys[i]});
  return out;
}

std::vector<std::string> lines_of(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("accuracy on constant predictors") {
  const auto all_one = labeled(std::vector<int>(10, 1));
  CHECK(accuracy(constant_model(1), all_one) == 100.0);
  CHECK(accuracy(constant_model(0), all_one) == 0.0);
  const auto half = labeled({0, 1, 0, 1, 0, 1});
  CHECK(accuracy(constant_model(0), half) == 50.0);
  CHECK_THROWS_AS(accuracy(constant_model(0), std::vector<Example>{}), ContractError);
  CHECK_THROWS_AS(accuracy(constant_model(0), std::vector<Example>{{"a", "b", std::nullopt}}),
                  ContractError);
}

TEST_CASE("accuracy agrees with a counting oracle") {
  const auto params = init_params(8, {64, 6, 4, 2}, {64, 0, 0});
  const auto data = synthetic_corpus(60, 3, {}, "q");
  std::size_t hits = 0;
  for (const auto& ex : data) {
    const auto enc = encode(params, params.featurizer(ex.text));
    const int guess = enc.logits.at(1) > enc.logits.at(0) ? 1 : 0;
    hits += guess == *ex.label;
  }
  CHECK(accuracy(params, data) == doctest::Approx(100.0 * hits / data.size()).epsilon(1e-15));
}

TEST_CASE("aggregate mean and standard error") {
  const std::vector<double> same{80, 80, 80};
  const auto a = aggregate(same);
  CHECK(a.mean == 80.0);
  CHECK(a.sem == 0.0);
  CHECK(a.format() == "80.00±0.00");
  const std::vector<double> two{80, 90};
  const auto b = aggregate(two);
  CHECK(b.mean == 85.0);
  CHECK(b.sem == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(b.format() == "85.00±5.00");
  CHECK(format_mean_sem(86.434, 1.2051) == "86.43±1.21");
  CHECK_THROWS_AS(aggregate(std::vector<double>{70}), ContractError);

  const std::vector<double> xs{71.5, 90.25, 83.0, 64.75};
  const std::vector<double> ys{83.0, 64.75, 71.5, 90.25};
  const auto c = aggregate(xs), d = aggregate(ys);
  CHECK(std::abs(c.mean - d.mean) <= 1e-12);
  CHECK(std::abs(c.sem - d.sem) <= 1e-12);
  double ss = 0;
  for (double x : xs) ss += (x - c.mean) * (x - c.mean);
  CHECK(c.sem == doctest::Approx(std::sqrt(ss / 3.0) / 2.0).epsilon(1e-14));
}

TEST_CASE("config fingerprint tracks training fields") {
  TrainConfig a;
  auto b = a;
  CHECK(config_fingerprint(a) == config_fingerprint(b));
  b.loss.lambda2 = 0.5;
  CHECK(config_fingerprint(a) != config_fingerprint(b));
}

TEST_CASE("ablation report") {
  SyntheticSpec spec;
  spec.min_tokens = 2;
  spec.max_tokens = 4;
  const auto pool = synthetic_corpus(160, 5, spec, "p");
  const auto test = synthetic_corpus(40, 6, spec, "t");
  std::vector<CorpusSplit> splits;
  for (std::uint64_t s : {1, 2, 3}) {
    auto sp = make_split(pool, 2, {3, 40, 20}, s);
    sp.test = test;
    splits.push_back(sp);
  }
  TrainConfig cfg;
  cfg.max_steps = 12;
  cfg.labeled_batch = 4;
  cfg.unlabeled_batch = 6;
  cfg.dims = {128, 8, 4, 2};
  cfg.featurizer = {128, 0, 0};
  const AugmenterFactory factory = [](const CorpusSplit&, std::uint64_t seed) {
    return Augmenter::lexical({0.2, 0.1}, seed);
  };
  std::vector<std::string> progress;
  const auto report = ablate(cfg, splits, factory, [&](const std::string& row, const SeedRun& run) {
    progress.push_back(row);
    if (row == "w/o CC") {
      for (const auto& s : run.result.steps) CHECK_FALSE(s.losses.cc.has_value());
    }
  });
  REQUIRE(report.rows.size() == 4);
  CHECK(report.rows[0].name == "full");
  CHECK(report.rows[1].name == "w/o SCL");
  CHECK(report.rows[2].name == "w/o CC");
  CHECK(report.rows[3].name == "w/o CON");
  CHECK(report.rows[1].loss.lambda1 == 0.0);
  CHECK(report.rows[2].loss.lambda3 == 0.0);
  CHECK(report.rows[3].loss.lambda2 == 0.0);
  CHECK(progress.size() == 12);
  for (const auto& row : report.rows) CHECK(row.metrics.per_seed_accuracy.size() == 3);
  const auto text = report.to_text();
  CHECK(text.find("w/o CON") != std::string::npos);
  CHECK(text.find("lambda2 = 0") != std::string::npos);
  const auto js = nlohmann::json::parse(report.to_json());
  CHECK(js["rows"].size() == 4);
  CHECK(js["note"].get<std::string>().find("lambda2") != std::string::npos);

  // The full row equals a direct run over the same splits.
  const auto direct = run_over_splits(cfg, splits, factory);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(report.rows[0].metrics.per_seed_accuracy[i] == direct[i].test_accuracy);
}

TEST_CASE("embedding export") {
  const auto dir = oracle::scratch("eval_export");
  const auto params = init_params(4, {64, 6, 5, 2}, {64, 0, 0});
  const LabelMap labels({"neg", "pos"});
  std::vector<Example> xs = synthetic_corpus(7, 1, {}, "e");
  xs[2].label.reset();
  xs[3].id = "has,comma";
  export_embeddings(params, xs, labels, dir / "a.csv");
  export_embeddings(params, xs, labels, dir / "b.csv");
  CHECK(read_file(dir / "a.csv") == read_file(dir / "b.csv"));

  const auto lines = lines_of(dir / "a.csv");
  REQUIRE(lines.size() == 8);
  CHECK(lines[0] == "id,label,z0,z1,z2,z3,z4");
  CHECK(lines[3].rfind(xs[2].id + ",,", 0) == 0);
  CHECK(lines[4].rfind("\"has,comma\",", 0) == 0);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (r == 4) continue;
    std::stringstream ss(lines[r]);
    std::string cell;
    std::getline(ss, cell, ',');
    std::getline(ss, cell, ',');
    double norm = 0;
    while (std::getline(ss, cell, ',')) norm += std::stod(cell) * std::stod(cell);
    CHECK(std::abs(std::sqrt(norm) - 1.0) <= 1e-10);
  }
}
