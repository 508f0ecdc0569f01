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

#include "ftcc/eval.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "ftcc/error.hpp"
#include "ftcc/hash.hpp"
#include "ftcc/io.hpp"

namespace ftcc {

namespace {
constexpr const char* kConNote = "w/o CON disables the consistency term (lambda2 = 0).";
}  // namespace

double accuracy(const EncoderParams& params, std::span<const Example> examples) {
  if (examples.empty()) throw ContractError("accuracy: empty example set");
  std::vector<FeatureVector> rows;
  rows.reserve(examples.size());
  for (const auto& ex : examples) {
    if (!ex.label) throw ContractError("accuracy: example '" + ex.id + "' has no label");
    rows.push_back(params.featurizer(ex.text));
  }
  const auto pred = predict(params, feature_matrix(rows));
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == *examples[i].label;
  return 100.0 * static_cast<double>(hit) / static_cast<double>(examples.size());
}

std::string format_mean_sem(double mean, double sem) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f±%.2f", mean, sem);
  return buf;
}

std::string RunMetrics::format() const { return format_mean_sem(mean, sem); }

RunMetrics aggregate(std::span<const double> accuracies, std::string fingerprint) {
  if (accuracies.size() < 2) throw ContractError("aggregate: need at least two runs");
  RunMetrics out;
  out.per_seed_accuracy.assign(accuracies.begin(), accuracies.end());
  out.fingerprint = std::move(fingerprint);
  const double k = static_cast<double>(accuracies.size());
  double total = 0.0;
  for (double a : accuracies) total += a;
  out.mean = total / k;
  double ss = 0.0;
  for (double a : accuracies) ss += (a - out.mean) * (a - out.mean);
  out.sem = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
  return out;
}

RunMetrics aggregate(std::span<const RunMetrics> runs) {
  std::vector<double> all;
  std::string fingerprint;
  for (const auto& r : runs) {
    all.insert(all.end(), r.per_seed_accuracy.begin(), r.per_seed_accuracy.end());
    if (fingerprint.empty()) fingerprint = r.fingerprint;
  }
  return aggregate(all, fingerprint);
}

std::string config_fingerprint(const TrainConfig& c) {
  std::ostringstream os;
  os << std::setprecision(17) << c.max_steps << '|' << c.labeled_batch << '|'
     << c.unlabeled_batch << '|' << c.peak_lr << '|' << c.warmup_fraction << '|'
     << c.weight_decay << '|' << c.loss.tau_scl << '|' << c.loss.tau_cc << '|'
     << c.loss.lambda1 << '|' << c.loss.lambda2 << '|' << c.loss.lambda3 << '|'
     << c.loss.cc_stop_gradient << '|' << c.adam.beta1 << '|' << c.adam.beta2 << '|'
     << c.adam.eps << '|' << c.dims.features << '|' << c.dims.hidden << '|' << c.dims.embed
     << '|' << c.dims.classes << '|' << c.featurizer.hash_seed << '|'
     << c.featurizer.max_tokens << '|' << c.eval_every;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(os.str())));
  return buf;
}

std::vector<SeedRun> run_over_splits(const TrainConfig& config, std::span<const CorpusSplit> splits,
                                     const AugmenterFactory& make_augmenter) {
  std::vector<SeedRun> out;
  for (const auto& split : splits) {
    TrainConfig c = config;
    c.seed = split.seed;
    SeedRun run;
    run.seed = split.seed;
    run.result = train(split, make_augmenter(split, split.seed), c);
    run.test_accuracy = split.test.empty() ? 0.0 : accuracy(run.result.best_params, split.test);
    out.push_back(std::move(run));
  }
  return out;
}

std::vector<AblationRow> ablation_variants(const LossConfig& base) {
  std::vector<AblationRow> rows(4);
  rows[0] = {"full", base, {}};
  rows[1] = {"w/o SCL", base, {}};
  rows[1].loss.lambda1 = 0.0;
  rows[2] = {"w/o CC", base, {}};
  rows[2].loss.lambda3 = 0.0;
  rows[3] = {"w/o CON", base, {}};
  rows[3].loss.lambda2 = 0.0;
  return rows;
}

AblationReport ablate(const TrainConfig& base, std::span<const CorpusSplit> splits,
                      const AugmenterFactory& make_augmenter, const AblationProgress& progress) {
  AblationReport report;
  report.rows = ablation_variants(base.loss);
  for (auto& row : report.rows) {
    TrainConfig c = base;
    c.loss = row.loss;
    std::vector<double> accs;
    for (const auto& split : splits) {
      auto runs = run_over_splits(c, std::span(&split, 1), make_augmenter);
      accs.push_back(runs.front().test_accuracy);
      if (progress) progress(row.name, runs.front());
    }
    row.metrics = aggregate(accs, config_fingerprint(c));
  }
  return report;
}

std::string AblationReport::to_text() const {
  std::ostringstream os;
  os << std::left << std::setw(10) << "Ablation" << "  " << std::setw(14) << "accuracy"
     << "  per-seed\n";
  for (const auto& row : rows) {
    os << std::setw(10) << row.name << "  " << std::setw(15) << row.metrics.format() << " ";
    for (std::size_t i = 0; i < row.metrics.per_seed_accuracy.size(); ++i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%s%.2f", i ? " " : "", row.metrics.per_seed_accuracy[i]);
      os << buf;
    }
    os << '\n';
  }
  os << kConNote << "\n";
  return os.str();
}

std::string AblationReport::to_json() const {
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json r;
    r["name"] = row.name;
    r["lambda1"] = row.loss.lambda1;
    r["lambda2"] = row.loss.lambda2;
    r["lambda3"] = row.loss.lambda3;
    r["per_seed_accuracy"] = row.metrics.per_seed_accuracy;
    r["mean"] = row.metrics.mean;
    r["sem"] = row.metrics.sem;
    r["fingerprint"] = row.metrics.fingerprint;
    list.push_back(std::move(r));
  }
  nlohmann::ordered_json doc;
  doc["rows"] = std::move(list);
  doc["note"] = kConNote;
  return doc.dump(2) + "\n";
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void export_embeddings(const EncoderParams& params, std::span<const Example> examples,
                       const LabelMap& labels, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "id,label";
  for (std::size_t j = 0; j < params.dims.embed; ++j) os << ",z" << j;
  os << '\n';
  if (!examples.empty()) {
    std::vector<FeatureVector> rows;
    rows.reserve(examples.size());
    for (const auto& ex : examples) rows.push_back(params.featurizer(ex.text));
    const Tensor z = encode(params, feature_matrix(rows)).z;
    const std::size_t d = z.cols();
    os << std::setprecision(17);
    for (std::size_t i = 0; i < examples.size(); ++i) {
      os << csv_field(examples[i].id) << ',';
      if (examples[i].label) os << csv_field(labels.name(*examples[i].label));
      for (std::size_t j = 0; j < d; ++j) os << ',' << z.at(i, j);
      os << '\n';
    }
  }
  write_file(path, os.str());
}

}  // namespace ftcc
