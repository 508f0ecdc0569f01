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

#include "ftcc/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ftcc/augment.hpp"
#include "ftcc/config.hpp"
#include "ftcc/corpus.hpp"
#include "ftcc/encoder.hpp"
#include "ftcc/error.hpp"
#include "ftcc/eval.hpp"
#include "ftcc/gradcheck.hpp"
#include "ftcc/io.hpp"
#include "ftcc/trainer.hpp"

namespace fs = std::filesystem;

namespace ftcc {
namespace {

constexpr const char* kOutRootEnv = "FTCC_OUT";
constexpr double kGradTolerance = 1e-4;

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::string seeds;
  std::vector<std::string> overrides;
  int jobs = 1;
};

RunConfig resolve_config(const CommonOptions& o) {
  RunConfig cfg = o.config_path.empty() ? RunConfig() : RunConfig::load(o.config_path);
  for (const auto& kv : o.overrides) cfg.apply_override(kv);
  return cfg;
}

fs::path output_dir(const CommonOptions& o, const char* command) {
  if (!o.out_dir.empty()) return o.out_dir;
  const char* root = std::getenv(kOutRootEnv);
  return fs::path(root && *root ? root : "ftcc-runs") / command;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text, const RunConfig& cfg) {
  if (text.empty()) return {cfg.get_uint("seed")};
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    RunConfig probe;
    probe.set("seed", item);
    out.push_back(probe.get_uint("seed"));
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = i + 1; j < out.size(); ++j)
      if (out[i] == out[j]) throw ConfigError("duplicate seed " + std::to_string(out[i]));
  if (out.empty()) throw ConfigError("--seeds is empty");
  return out;
}

fs::path seed_dir(const fs::path& out, std::uint64_t seed) {
  return out / ("seed-" + std::to_string(seed));
}

void make_dirs(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create directory '" + p.string() + "': " + ec.message());
}

// Label map, training pool and test set named by the config.
struct Data {
  LabelMap labels;
  std::vector<Example> pool;
  std::vector<Example> test;
};

Data load_data(const RunConfig& cfg) {
  const auto data_path = cfg.get_path("data");
  if (!data_path) throw ConfigError("config key 'data' is required");
  Data d;
  if (const std::string& names = cfg.get("labels"); !names.empty()) {
    std::vector<std::string> list;
    std::stringstream ss(names);
    std::string item;
    while (std::getline(ss, item, ',')) list.push_back(item);
    d.labels = LabelMap(list);
  } else {
    d.labels = LabelMap::infer(*data_path);
  }
  d.pool = load_dataset(*data_path, d.labels);
  if (const auto test = cfg.get_path("test")) d.test = load_dataset(*test, d.labels);
  return d;
}

CorpusSplit split_for(const Data& d, const RunConfig& cfg, std::uint64_t seed) {
  CorpusSplit s = make_split(d.pool, d.labels.size(), cfg.split_sizes(), seed, &d.labels);
  s.test = d.test;
  return s;
}

Augmenter augmenter_for(const RunConfig& cfg, const CorpusSplit& split, std::uint64_t seed) {
  if (cfg.augment_source() == AugmentSource::kExternal) {
    const auto paired = cfg.get_path("paired");
    if (!paired) throw ConfigError("augmentation = external needs 'paired'");
    return Augmenter::external(load_paired(*paired, split.unlabeled), split.unlabeled);
  }
  return Augmenter::lexical(cfg.noise_options(), stream_seed(seed, SeedStream::kAugment));
}

RunConfig with_seed(const RunConfig& cfg, std::uint64_t seed) {
  RunConfig c = cfg;
  c.set("seed", std::to_string(seed));
  return c;
}

std::string step_line(const StepState& s) {
  nlohmann::ordered_json j;
  j["step"] = s.step;
  j["alpha"] = s.alpha;
  j["lr"] = s.lr;
  j["l_ce"] = s.losses.ce;
  const auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  j["l_scl"] = opt(s.losses.scl);
  j["l_con"] = opt(s.losses.con);
  j["l_cc"] = opt(s.losses.cc);
  j["l_total"] = s.total;
  return j.dump();
}

// -- split -------------------------------------------------------------------------

int cmd_split(const CommonOptions& o, std::ostream& out) {
  const RunConfig cfg = resolve_config(o);
  const auto seeds = parse_seeds(o.seeds, cfg);
  const Data d = load_data(cfg);
  const fs::path root = output_dir(o, "split");
  for (auto seed : seeds) {
    const CorpusSplit s = split_for(d, cfg, seed);
    const fs::path dir = seed_dir(root, seed);
    make_dirs(dir);
    write_file(dir / "config.resolved", with_seed(cfg, seed).resolved());
    save_dataset(dir / "labeled.jsonl", s.labeled, d.labels);
    save_dataset(dir / "unlabeled.jsonl", s.unlabeled, d.labels);
    save_dataset(dir / "dev.jsonl", s.dev, d.labels);
    write_manifest(dir / "manifest.jsonl", s);
    write_unlabeled_truth(dir / "unlabeled_truth.jsonl", s, d.labels);
    out << "seed " << seed << ": labeled " << s.labeled.size() << ", unlabeled "
        << s.unlabeled.size() << ", dev " << s.dev.size() << " -> " << dir.string() << '\n';
  }
  return kExitOk;
}

// -- train ---------------------------------------------------------------------------

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::optional<double> dev_best;
  std::size_t best_step = 0;
  std::optional<double> test_accuracy;
};

SeedOutcome train_one(const RunConfig& base, const Data& d, std::uint64_t seed,
                      const fs::path& dir) {
  const RunConfig cfg = with_seed(base, seed);
  make_dirs(dir);
  write_file(dir / "config.resolved", cfg.resolved());
  const CorpusSplit split = split_for(d, cfg, seed);
  write_manifest(dir / "manifest.jsonl", split);
  const TrainConfig tc = cfg.train_config(d.labels.size());

  // Streamed so the log up to a numeric fault survives it.
  std::ofstream steps(dir / "steps.jsonl", std::ios::binary | std::ios::trunc);
  if (!steps) throw IoError("cannot write '" + (dir / "steps.jsonl").string() + "'");
  const TrainResult r = train(split, augmenter_for(cfg, split, seed), tc,
                              [&](const StepState& s, const EncoderParams&) { steps << step_line(s) << '\n'; });
  steps.close();

  std::ostringstream dev;
  for (const auto& p : r.dev_curve) {
    nlohmann::ordered_json j;
    j["step"] = p.step;
    j["dev_accuracy"] = p.accuracy;
    dev << j.dump() << '\n';
  }
  write_file(dir / "dev.jsonl", dev.str());
  save_checkpoint(dir / "checkpoint.json", r.best_params, d.labels);
  save_checkpoint(dir / "final.json", r.final_params, d.labels);

  SeedOutcome outcome{seed, r.best_dev_accuracy, r.best_step, std::nullopt};
  if (!split.test.empty()) outcome.test_accuracy = accuracy(r.best_params, split.test);
  nlohmann::ordered_json m;
  m["seed"] = seed;
  m["fingerprint"] = config_fingerprint(tc);
  m["best_step"] = r.best_step;
  m["dev_best_accuracy"] = r.best_dev_accuracy ? nlohmann::ordered_json(*r.best_dev_accuracy)
                                               : nlohmann::ordered_json(nullptr);
  m["test_accuracy"] = outcome.test_accuracy ? nlohmann::ordered_json(*outcome.test_accuracy)
                                             : nlohmann::ordered_json(nullptr);
  write_file(dir / "metrics.json", m.dump(2) + "\n");
  return outcome;
}

std::string fmt_pct(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

int cmd_train(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = resolve_config(o);
  const auto seeds = parse_seeds(o.seeds, cfg);
  const Data d = load_data(cfg);
  const fs::path root = output_dir(o, "train");
  make_dirs(root);

  // Seeds fan out over at most `jobs` threads; every seed owns its directory.
  std::vector<SeedOutcome> outcomes(seeds.size());
  const std::size_t jobs = static_cast<std::size_t>(std::max(1, o.jobs));
  for (std::size_t start = 0; start < seeds.size(); start += jobs) {
    std::vector<std::future<SeedOutcome>> running;
    for (std::size_t i = start; i < std::min(seeds.size(), start + jobs); ++i) {
      running.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred,
                                   [&, i] { return train_one(cfg, d, seeds[i], seed_dir(root, seeds[i])); }));
    }
    for (std::size_t k = 0; k < running.size(); ++k) outcomes[start + k] = running[k].get();
  }

  std::vector<double> tests;
  for (const auto& oc : outcomes) {
    out << "seed " << oc.seed << ": dev-best "
        << (oc.dev_best ? fmt_pct(*oc.dev_best) : std::string("n/a")) << " at step "
        << oc.best_step;
    if (oc.test_accuracy) {
      out << ", test " << fmt_pct(*oc.test_accuracy);
      tests.push_back(*oc.test_accuracy);
    }
    out << '\n';
  }
  if (tests.size() >= 2) {
    const RunMetrics m = aggregate(tests, config_fingerprint(cfg.train_config(d.labels.size())));
    out << "test accuracy over " << tests.size() << " seeds: " << m.format() << '\n';
    nlohmann::ordered_json j;
    j["per_seed_accuracy"] = m.per_seed_accuracy;
    j["mean"] = m.mean;
    j["sem"] = m.sem;
    j["fingerprint"] = m.fingerprint;
    write_file(root / "summary.json", j.dump(2) + "\n");
  }
  err << "wrote " << root.string() << '\n';
  return kExitOk;
}

// -- eval ---------------------------------------------------------------------------

int cmd_eval(const CommonOptions& o, std::ostream& out) {
  const fs::path root = output_dir(o, "train");
  std::vector<fs::path> dirs;
  if (!o.seeds.empty()) {
    for (auto s : parse_seeds(o.seeds, RunConfig())) dirs.push_back(seed_dir(root, s));
  } else {
    if (!fs::is_directory(root)) throw IoError("no run directory '" + root.string() + "'");
    for (const auto& entry : fs::directory_iterator(root)) {
      if (entry.is_directory() && entry.path().filename().string().rfind("seed-", 0) == 0) {
        dirs.push_back(entry.path());
      }
    }
    std::sort(dirs.begin(), dirs.end());
  }
  if (dirs.empty()) throw IoError("no seed-* runs under '" + root.string() + "'");

  std::vector<double> tests;
  for (const auto& dir : dirs) {
    RunConfig cfg = RunConfig::load(dir / "config.resolved");
    for (const auto& kv : o.overrides) cfg.apply_override(kv);
    const Checkpoint ck = load_checkpoint(dir / "checkpoint.json");
    const Data d = load_data(cfg);
    const CorpusSplit split = split_for(d, cfg, cfg.get_uint("seed"));
    nlohmann::ordered_json j;
    out << dir.filename().string() << ':';
    if (!split.dev.empty()) {
      const double dev = accuracy(ck.params, split.dev);
      j["dev_accuracy"] = dev;
      out << " dev " << fmt_pct(dev);
    }
    if (!split.test.empty()) {
      const double test = accuracy(ck.params, split.test);
      j["test_accuracy"] = test;
      tests.push_back(test);
      out << " test " << fmt_pct(test);
    }
    out << '\n';
    write_file(dir / "eval.json", j.dump(2) + "\n");
  }
  if (tests.size() >= 2) out << "test accuracy: " << aggregate(tests).format() << '\n';
  return kExitOk;
}

// -- ablate ---------------------------------------------------------------------------

int cmd_ablate(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = resolve_config(o);
  const auto seeds = parse_seeds(o.seeds.empty() ? std::string("1,2,3") : o.seeds, cfg);
  if (seeds.size() < 2) throw ConfigError("ablate needs at least two seeds");
  const Data d = load_data(cfg);
  if (d.test.empty()) throw ConfigError("ablate needs a 'test' set");
  std::vector<CorpusSplit> splits;
  for (auto s : seeds) splits.push_back(split_for(d, cfg, s));
  const fs::path root = output_dir(o, "ablate");
  make_dirs(root);
  write_file(root / "config.resolved", cfg.resolved());

  const TrainConfig base = cfg.train_config(d.labels.size());
  const AblationReport report = ablate(
      base, splits,
      [&](const CorpusSplit& split, std::uint64_t seed) { return augmenter_for(cfg, split, seed); },
      [&](const std::string& row, const SeedRun& run) {
        err << row << " seed " << run.seed << ": test " << fmt_pct(run.test_accuracy) << '\n';
      });
  write_file(root / "ablation.txt", report.to_text());
  write_file(root / "ablation.json", report.to_json());
  out << report.to_text();
  return kExitOk;
}

// -- gradcheck -----------------------------------------------------------------------

int cmd_gradcheck(int instances, std::uint64_t seed, std::ostream& out) {
  const auto entries = run_gradient_suite(instances, seed);
  bool ok = true;
  for (const auto& e : entries) {
    const bool pass = e.max_rel_error <= kGradTolerance;
    ok = ok && pass;
    out << std::left << std::setw(14) << e.name << " max rel err " << std::scientific
        << std::setprecision(3) << e.max_rel_error << std::defaultfloat << " over "
        << e.instances << " instances " << (pass ? "ok" : "FAIL") << '\n';
  }
  return ok ? kExitOk : kExitNumeric;
}

// -- export-embeddings ------------------------------------------------------------------

int cmd_export(const std::string& checkpoint, const std::string& input, const std::string& output,
               std::ostream& out) {
  const Checkpoint ck = load_checkpoint(checkpoint);
  const auto examples = load_dataset(input, ck.labels);
  export_embeddings(ck.params, examples, ck.labels, output);
  out << "wrote " << examples.size() << " embeddings to " << output << '\n';
  return kExitOk;
}

void add_common(CLI::App* cmd, CommonOptions& o, bool with_jobs = false) {
  cmd->add_option("--config", o.config_path, "key = value config file");
  cmd->add_option("--out", o.out_dir, std::string("output directory (default $") + kOutRootEnv +
                                          "/<command>)");
  cmd->add_option("--seeds", o.seeds, "comma-separated seeds");
  cmd->add_option("--set", o.overrides, "override a config key (key=value, repeatable)");
  if (with_jobs) cmd->add_option("--jobs", o.jobs, "seeds trained concurrently");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semi-supervised few-shot text classification (ftcc)"};
  app.require_subcommand(1);

  CommonOptions split_o, train_o, eval_o, ablate_o;
  auto* split_cmd = app.add_subcommand("split", "write seeded labeled/unlabeled/dev splits");
  add_common(split_cmd, split_o);
  auto* train_cmd = app.add_subcommand("train", "train one model per seed");
  add_common(train_cmd, train_o, true);
  auto* eval_cmd = app.add_subcommand("eval", "re-score saved dev-best checkpoints");
  add_common(eval_cmd, eval_o);
  auto* ablate_cmd = app.add_subcommand("ablate", "full objective vs. one-term-removed variants");
  add_common(ablate_cmd, ablate_o);

  int instances = 20;
  std::uint64_t grad_seed = 7;
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check of every loss");
  grad_cmd->add_option("--instances", instances, "random instances per loss");
  grad_cmd->add_option("--seed", grad_seed, "instance generator seed");

  std::string ck_path, input_path, output_path;
  auto* export_cmd = app.add_subcommand("export-embeddings", "write normalized embeddings as CSV");
  export_cmd->add_option("--checkpoint", ck_path, "checkpoint.json")->required();
  export_cmd->add_option("--input", input_path, "line-delimited JSON examples")->required();
  export_cmd->add_option("--output", output_path, "CSV destination")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*split_cmd) return cmd_split(split_o, out);
    if (*train_cmd) return cmd_train(train_o, out, err);
    if (*eval_cmd) return cmd_eval(eval_o, out);
    if (*ablate_cmd) return cmd_ablate(ablate_o, out, err);
    if (*grad_cmd) return cmd_gradcheck(instances, grad_seed, out);
    if (*export_cmd) return cmd_export(ck_path, input_path, output_path, out);
  } catch (const NumericFault& e) {
    err << "numeric fault: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace ftcc
