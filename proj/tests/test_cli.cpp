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

#include <sstream>

#include "ftcc/cli.hpp"
#include "ftcc/corpus.hpp"
#include "ftcc/io.hpp"
#include "ftcc/synthetic.hpp"
#include "oracles.hpp"

using namespace ftcc;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "ftcc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Small corpus plus a config that trains in well under a second.
fs::path setup(const std::string& name) {
  const auto dir = oracle::scratch(name);
  SyntheticSpec spec;
  spec.min_tokens = 2;
  spec.max_tokens = 4;
  const auto labels = synthetic_labels();
  save_dataset(dir / "train.jsonl", synthetic_corpus(200, 3, spec, "p"), labels);
  save_dataset(dir / "test.jsonl", synthetic_corpus(40, 4, spec, "t"), labels);
  write_file(dir / "run.cfg",
             "# tiny run\n"
             "data = train.jsonl\n"
             "test = test.jsonl\n"
             "K = 4\nunlabeled = 40\ndev = 20\n"
             "max_step = 20\nlabeled_batch = 4\nunlabeled_batch = 8\n"
             "F = 256\nh = 12\nd = 6\n");
  return dir;
}

nlohmann::json load_json(const fs::path& p) { return nlohmann::json::parse(read_file(p)); }

}  // namespace

TEST_CASE("gradcheck passes") {
  const auto r = run({"gradcheck", "--instances", "20"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("scl") != std::string::npos);
}

TEST_CASE("usage and validation errors exit 1") {
  CHECK(run({"--help"}).code == kExitOk);
  CHECK(run({"train", "--bogus"}).code == kExitValidation);
  const auto dir = setup("cli_errors");
  const auto unknown = run({"train", "--config", (dir / "run.cfg").string(), "--set", "nonsense=3",
                            "--out", (dir / "o").string()});
  CHECK(unknown.code == kExitValidation);
  CHECK(unknown.err.find("nonsense") != std::string::npos);
  const auto no_data = run({"train", "--out", (dir / "o").string()});
  CHECK(no_data.code == kExitValidation);
  const auto dup = run({"train", "--config", (dir / "run.cfg").string(), "--seeds", "1,1",
                        "--out", (dir / "o").string()});
  CHECK(dup.code == kExitValidation);
}

TEST_CASE("split writes every bucket") {
  const auto dir = setup("cli_split");
  const auto r = run({"split", "--config", (dir / "run.cfg").string(), "--seeds", "1,2",
                      "--out", (dir / "s").string()});
  REQUIRE(r.code == kExitOk);
  for (const char* f : {"labeled.jsonl", "unlabeled.jsonl", "dev.jsonl", "manifest.jsonl",
                        "unlabeled_truth.jsonl", "config.resolved"}) {
    CHECK(fs::exists(dir / "s" / "seed-1" / f));
    CHECK(fs::exists(dir / "s" / "seed-2" / f));
  }
  const auto labels = synthetic_labels();
  CHECK(load_dataset(dir / "s" / "seed-1" / "labeled.jsonl", labels).size() == 8);
}

TEST_CASE("train then eval reproduces the dev-best numbers") {
  const auto dir = setup("cli_train");
  const auto out = dir / "runs";
  const auto r = run({"train", "--config", (dir / "run.cfg").string(), "--seeds", "1,2",
                      "--jobs", "2", "--out", out.string()});
  REQUIRE(r.code == kExitOk);
  CHECK(fs::exists(out / "summary.json"));
  for (const char* f : {"config.resolved", "manifest.jsonl", "steps.jsonl", "dev.jsonl",
                        "checkpoint.json", "final.json", "metrics.json"}) {
    CHECK(fs::exists(out / "seed-1" / f));
  }
  const auto first_step = nlohmann::json::parse(read_file(out / "seed-1" / "steps.jsonl").substr(
      0, read_file(out / "seed-1" / "steps.jsonl").find('\n')));
  for (const char* k : {"step", "alpha", "lr", "l_ce", "l_scl", "l_con", "l_cc", "l_total"}) {
    CHECK(first_step.contains(k));
  }

  const auto e = run({"eval", "--out", out.string()});
  REQUIRE(e.code == kExitOk);
  for (const char* s : {"seed-1", "seed-2"}) {
    const auto metrics = load_json(out / s / "metrics.json");
    const auto ev = load_json(out / s / "eval.json");
    CHECK(ev["dev_accuracy"].get<double>() == metrics["dev_best_accuracy"].get<double>());
    CHECK(ev["test_accuracy"].get<double>() == metrics["test_accuracy"].get<double>());
  }
}

TEST_CASE("rerunning from config.resolved is bitwise identical") {
  const auto dir = setup("cli_rerun");
  REQUIRE(run({"train", "--config", (dir / "run.cfg").string(), "--seeds", "5", "--out",
               (dir / "a").string()}).code == kExitOk);
  REQUIRE(run({"train", "--config", (dir / "a" / "seed-5" / "config.resolved").string(), "--out",
               (dir / "b").string()}).code == kExitOk);
  for (const char* f : {"steps.jsonl", "checkpoint.json", "final.json", "metrics.json",
                        "config.resolved", "dev.jsonl"}) {
    INFO(f);
    CHECK(read_file(dir / "a" / "seed-5" / f) == read_file(dir / "b" / "seed-5" / f));
  }
}

TEST_CASE("ablate prints four rows") {
  const auto dir = setup("cli_ablate");
  const auto r = run({"ablate", "--config", (dir / "run.cfg").string(), "--set", "max_step=8",
                      "--out", (dir / "ab").string()});
  REQUIRE(r.code == kExitOk);
  for (const char* row : {"full", "w/o SCL", "w/o CC", "w/o CON"}) CHECK(r.out.find(row) != std::string::npos);
  CHECK(load_json(dir / "ab" / "ablation.json")["rows"].size() == 4);
}

TEST_CASE("numeric blow-up exits 2") {
  const auto dir = setup("cli_nan");
  const auto r = run({"train", "--config", (dir / "run.cfg").string(), "--set",
                      "learning_rate=1e300", "--set", "warmup_percent=0", "--out",
                      (dir / "n").string()});
  CHECK(r.code == kExitNumeric);
  CHECK(r.err.find("step") != std::string::npos);
}

TEST_CASE("export-embeddings writes one row per example") {
  const auto dir = setup("cli_export");
  REQUIRE(run({"train", "--config", (dir / "run.cfg").string(), "--out", (dir / "t").string()})
              .code == kExitOk);
  const auto r = run({"export-embeddings", "--checkpoint", (dir / "t" / "seed-1" / "checkpoint.json").string(),
                      "--input", (dir / "test.jsonl").string(), "--output", (dir / "z.csv").string()});
  REQUIRE(r.code == kExitOk);
  const auto csv = read_file(dir / "z.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 41);
  CHECK(csv.rfind("id,label,z0,z1,z2,z3,z4,z5\n", 0) == 0);
}
