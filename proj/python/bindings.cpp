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


// Python bindings: numeric kernels on numpy arrays, the split protocol, and
// a train/predict round trip driven by config keys.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "ftcc/augment.hpp"
#include "ftcc/cli.hpp"
#include "ftcc/config.hpp"
#include "ftcc/corpus.hpp"
#include "ftcc/encoder.hpp"
#include "ftcc/error.hpp"
#include "ftcc/eval.hpp"
#include "ftcc/gradcheck.hpp"
#include "ftcc/losses.hpp"
#include "ftcc/synthetic.hpp"
#include "ftcc/trainer.hpp"

namespace py = pybind11;
using namespace ftcc;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a, bool requires_grad = false) {
  if (a.ndim() != 2) throw DimensionError("expected a 2-d array");
  const Shape shape{static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1))};
  std::vector<double> data(a.data(), a.data() + a.size());
  return requires_grad ? Tensor::parameter(shape, std::move(data)) : Tensor::from(shape, std::move(data));
}

Array to_array(const Tensor& t, std::span<const double> values) {
  Array out({t.rows(), t.cols()});
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

// Loss value plus its gradient with respect to the first input.
py::tuple value_and_grad(const Tensor& loss, const Tensor& wrt) {
  backward(loss);
  return py::make_tuple(loss.item(), to_array(wrt, wrt.grad()));
}

Example to_example(const py::handle& rec, std::size_t index) {
  auto d = rec.cast<py::dict>();
  Example ex;
  ex.text = d["text"].cast<std::string>();
  ex.id = d.contains("id") ? py::str(d["id"]).cast<std::string>() : std::to_string(index);
  if (d.contains("label") && !d["label"].is_none()) ex.label = d["label"].cast<int>();
  return ex;
}

std::vector<Example> to_examples(const py::list& records) {
  std::vector<Example> out;
  for (std::size_t i = 0; i < records.size(); ++i) out.push_back(to_example(records[i], i));
  return out;
}

py::list from_examples(const std::vector<Example>& xs) {
  py::list out;
  for (const auto& ex : xs) {
    py::dict d;
    d["id"] = ex.id;
    d["text"] = ex.text;
    d["label"] = ex.label ? py::cast(*ex.label) : py::none();
    out.append(d);
  }
  return out;
}

RunConfig config_from(const py::dict& overrides) {
  RunConfig cfg;
  for (const auto& [k, v] : overrides) cfg.set(py::str(k).cast<std::string>(), py::str(v).cast<std::string>());
  return cfg;
}

class Model {
 public:
  Model(EncoderParams params, LabelMap labels) : params_(std::move(params)), labels_(std::move(labels)) {}

  std::vector<int> predict(const std::vector<std::string>& texts) const {
    if (texts.empty()) return {};
    return ftcc::predict(params_, features(texts));
  }
  Array embed(const std::vector<std::string>& texts) const {
    const auto enc = encode_texts(params_, texts);
    return to_array(enc.z, enc.z.data());
  }
  double accuracy(const py::list& records) const { return ftcc::accuracy(params_, to_examples(records)); }
  void save(const std::filesystem::path& path) const { save_checkpoint(path, params_, labels_); }
  static Model load(const std::filesystem::path& path) {
    auto ck = load_checkpoint(path);
    return Model(std::move(ck.params), std::move(ck.labels));
  }
  const std::vector<std::string>& labels() const { return labels_.names(); }

 private:
  Tensor features(const std::vector<std::string>& texts) const {
    std::vector<FeatureVector> rows;
    for (const auto& t : texts) rows.push_back(params_.featurizer(t));
    return feature_matrix(rows);
  }
  EncoderParams params_;
  LabelMap labels_;
};

}  // namespace

PYBIND11_MODULE(_ftcc, m) {
  m.doc() = "Semi-supervised few-shot text classification core";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<NumericFault>(m, "NumericFault", PyExc_ArithmeticError);

  m.def("featurize", [](const std::string& text, std::size_t dim, std::uint64_t hash_seed) {
        const auto fv = featurize(text, dim, hash_seed);
        return py::array_t<double>(fv.values.size(), fv.values.data());
      }, py::arg("text"), py::arg("dim") = 4096, py::arg("hash_seed") = 0);

  m.def("lexical_noise", &lexical_noise, py::arg("text"), py::arg("drop_prob"), py::arg("swap_prob"),
        py::arg("seed"));

  m.def("alpha_schedule", &alpha_schedule, py::arg("t"), py::arg("total_steps"));
  m.def("lr_schedule", &lr_schedule, py::arg("t"), py::arg("total_steps"), py::arg("warmup_fraction"),
        py::arg("peak_lr"));

  m.def("ce_loss", [](const Array& logits, const std::vector<int>& labels) {
        auto x = to_tensor(logits, true);
        return value_and_grad(ce_loss(x, labels), x);
      }, py::arg("logits"), py::arg("labels"),
      "Returns (loss, d loss / d logits).");
  m.def("scl_loss", [](const Array& z, const std::vector<int>& labels, double tau) {
        auto x = to_tensor(z, true);
        return value_and_grad(scl_loss({x, Tensor{}, labels}, tau), x);
      }, py::arg("z"), py::arg("labels"), py::arg("tau"),
      "z must have unit rows. Returns (loss, d loss / d z).");
  m.def("consistency_loss", [](const Array& orig, const Array& aug) {
        auto a = to_tensor(aug, true);
        return value_and_grad(consistency_loss(to_tensor(orig), a), a);
      }, py::arg("orig_logits"), py::arg("aug_logits"),
      "Returns (loss, d loss / d aug_logits).");
  m.def("cc_loss", [](const Array& orig, const Array& aug, double tau, bool stop_gradient) {
        auto a = to_tensor(aug, true);
        return value_and_grad(cc_loss({to_tensor(orig), a, Tensor{}, Tensor{}}, tau, stop_gradient), a);
      }, py::arg("orig_z"), py::arg("aug_z"), py::arg("tau"), py::arg("stop_gradient") = true,
      "Returns (loss, d loss / d aug_z).");

  m.def("gradient_suite", [](int instances, std::uint64_t seed) {
        py::dict out;
        for (const auto& e : run_gradient_suite(instances, seed)) out[py::str(e.name)] = e.max_rel_error;
        return out;
      }, py::arg("instances") = 20, py::arg("seed") = 7);

  m.def("synthetic_corpus", [](std::size_t count, std::uint64_t seed, std::size_t min_tokens,
                               std::size_t max_tokens) {
        SyntheticSpec spec;
        spec.min_tokens = min_tokens;
        spec.max_tokens = max_tokens;
        return from_examples(synthetic_corpus(count, seed, spec));
      }, py::arg("count"), py::arg("seed"), py::arg("min_tokens") = SyntheticSpec{}.min_tokens,
      py::arg("max_tokens") = SyntheticSpec{}.max_tokens,
      "Two-topic corpus; labels are 0/1 for topic_a/topic_b.");

  m.def("make_split", [](const py::list& records, std::size_t num_classes, std::size_t k,
                         std::size_t unlabeled, std::size_t dev, std::uint64_t seed) {
        const auto split = make_split(to_examples(records), num_classes, {k, unlabeled, dev}, seed);
        py::dict out;
        out["labeled"] = from_examples(split.labeled);
        out["unlabeled"] = from_examples(split.unlabeled);
        out["dev"] = from_examples(split.dev);
        return out;
      }, py::arg("records"), py::arg("num_classes"), py::arg("k") = 10, py::arg("unlabeled") = 0,
      py::arg("dev") = 0, py::arg("seed") = 1);

  m.def("aggregate", [](const std::vector<double>& accs) {
        const auto r = aggregate(accs);
        return py::make_tuple(r.mean, r.sem, r.format());
      }, py::arg("accuracies"), "Returns (mean, sem, 'mean±sem').");

  py::class_<Model>(m, "Model")
      .def("predict", &Model::predict, py::arg("texts"))
      .def("embed", &Model::embed, py::arg("texts"))
      .def("accuracy", &Model::accuracy, py::arg("records"))
      .def("save", &Model::save, py::arg("path"))
      .def_static("load", &Model::load, py::arg("path"))
      .def_property_readonly("labels", &Model::labels);

  m.def("train", [](const py::dict& split, const std::vector<std::string>& labels, const py::dict& config) {
        const RunConfig cfg = config_from(config);
        CorpusSplit s;
        s.labeled = to_examples(split["labeled"].cast<py::list>());
        s.unlabeled = to_examples(split["unlabeled"].cast<py::list>());
        if (split.contains("dev")) s.dev = to_examples(split["dev"].cast<py::list>());
        const auto seed = cfg.get_uint("seed");
        const Augmenter aug = Augmenter::lexical(cfg.noise_options(), stream_seed(seed, SeedStream::kAugment));
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(s, aug, cfg.train_config(labels.size()));
        }
        return Model(std::move(r.best_params), LabelMap(labels));
      }, py::arg("split"), py::arg("labels"), py::arg("config") = py::dict(),
      "Trains on {'labeled', 'unlabeled', 'dev'} record lists; config keys as in the CLI.");

  m.def("run_cli", [](const std::vector<std::string>& args) {
        std::vector<std::string> full{"ftcc"};
        full.insert(full.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const auto& a : full) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      }, py::arg("args"), "Runs an ftcc subcommand; returns (exit_code, stdout, stderr).");
}
