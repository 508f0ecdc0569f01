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

#include "ftcc/trainer.hpp"

#include <cmath>
#include <sstream>

#include "ftcc/error.hpp"
#include "ftcc/rng.hpp"

namespace ftcc {

double alpha_schedule(std::size_t t, std::size_t total_steps) {
  if (total_steps == 0) throw ContractError("alpha_schedule: T must be positive");
  if (t > total_steps) {
    throw ContractError("alpha_schedule: step " + std::to_string(t) + " exceeds T = " +
                        std::to_string(total_steps));
  }
  if (2 * t <= total_steps) return 0.0;
  return static_cast<double>(2 * t - total_steps) / static_cast<double>(total_steps);
}

double lr_schedule(std::size_t t, std::size_t total_steps, double warmup_fraction,
                   double peak_lr) {
  if (t > total_steps) {
    throw ContractError("lr_schedule: step " + std::to_string(t) + " exceeds T = " +
                        std::to_string(total_steps));
  }
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) {
    throw ContractError("lr_schedule: warmup fraction must lie in [0, 1)");
  }
  const auto warmup = static_cast<std::size_t>(
      std::llround(warmup_fraction * static_cast<double>(total_steps)));
  if (t < warmup) {
    return peak_lr * (static_cast<double>(t) / static_cast<double>(warmup));
  }
  if (total_steps == warmup) return peak_lr;
  return peak_lr *
         (static_cast<double>(total_steps - t) / static_cast<double>(total_steps - warmup));
}

double total_loss(const LossComponents& parts, const LossConfig& config, double alpha) {
  const auto check = [](const char* name, double v) {
    if (!std::isfinite(v)) {
      throw NumericFault(std::string("non-finite loss component ") + name + " = " +
                         std::to_string(v));
    }
    return v;
  };
  const double ce = check("l_ce", parts.ce);
  const double scl = parts.scl ? check("l_scl", *parts.scl) : 0.0;
  const double con = parts.con ? check("l_con", *parts.con) : 0.0;
  const double cc = parts.cc ? check("l_cc", *parts.cc) : 0.0;
  return ce + config.lambda1 * scl + config.lambda2 * con + alpha * config.lambda3 * cc;
}

// -- Adam ----------------------------------------------------------------------

void adam_step(std::span<double> param, std::span<const double> grad, AdamMoments& state,
               double lr, double weight_decay, bool decay, const AdamHyper& hyper) {
  if (grad.size() != param.size()) throw ContractError("adam_step: gradient shape mismatch");
  if (state.m.empty() && state.v.empty()) {
    state.m.assign(param.size(), 0.0);
    state.v.assign(param.size(), 0.0);
  }
  if (state.m.size() != param.size() || state.v.size() != param.size()) {
    throw ContractError("adam_step: moment shape mismatch");
  }
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(hyper.beta1, t);
  const double c2 = 1.0 - std::pow(hyper.beta2, t);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    state.m[i] = hyper.beta1 * state.m[i] + (1.0 - hyper.beta1) * g;
    state.v[i] = hyper.beta2 * state.v[i] + (1.0 - hyper.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    const double shrink = decay ? lr * weight_decay * param[i] : 0.0;
    param[i] = param[i] - lr * (m_hat / (std::sqrt(v_hat) + hyper.eps)) - shrink;
  }
}

Adam::Adam(std::vector<EncoderParams::Named> params, AdamHyper hyper)
    : params_(std::move(params)), moments_(params_.size()), hyper_(hyper) {}

void Adam::step(double lr, double weight_decay) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    const std::vector<double> g = p.tensor.grad();
    adam_step(p.tensor.mutable_data(), g, moments_[i], lr, weight_decay, p.is_weight, hyper_);
  }
}

// -- sampling --------------------------------------------------------------------

BatchSampler::BatchSampler(std::size_t n, std::size_t batch, std::uint64_t seed)
    : n_(n), batch_(batch), rng_(seed) {
  if (n == 0 || batch == 0) throw ConfigError("sampler needs a non-empty pool and batch");
  order_.resize(n);
  for (std::size_t i = 0; i < n; ++i) order_[i] = i;
}

std::vector<std::size_t> BatchSampler::next() {
  std::vector<std::size_t> out;
  out.reserve(batch_);
  if (n_ < batch_) {
    for (std::size_t i = 0; i < batch_; ++i) out.push_back(rng_.below(n_));
    return out;
  }
  if (!started_ || pos_ + batch_ > n_) {
    if (started_) ++epoch_;
    started_ = true;
    rng_.shuffle(std::span(order_));
    pos_ = 0;
  }
  out.assign(order_.begin() + static_cast<std::ptrdiff_t>(pos_),
             order_.begin() + static_cast<std::ptrdiff_t>(pos_ + batch_));
  pos_ += batch_;
  return out;
}

// -- training ---------------------------------------------------------------------

void TrainConfig::validate() const {
  if (max_steps < 1) throw ConfigError("max_step must be at least 1");
  if (labeled_batch < 2 || unlabeled_batch < 2) throw ConfigError("batch sizes must be >= 2");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) {
    throw ConfigError("warmup_percent must lie in [0, 1)");
  }
  if (!(peak_lr >= 0.0) || !std::isfinite(peak_lr)) throw ConfigError("learning_rate invalid");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be nonnegative");
  loss.validate();
  if (featurizer.dim != dims.features) throw ConfigError("featurizer dim differs from F");
}

std::uint64_t stream_seed(std::uint64_t seed, SeedStream stream) {
  return derive_seed(seed, static_cast<std::uint64_t>(stream));
}

namespace {

std::vector<FeatureVector> featurize_all(const Featurizer& fz, std::span<const Example> xs) {
  std::vector<FeatureVector> out;
  out.reserve(xs.size());
  for (const auto& ex : xs) out.push_back(fz(ex.text));
  return out;
}

Tensor rows_of(const std::vector<FeatureVector>& pool, std::span<const std::size_t> idx) {
  std::vector<FeatureVector> rows;
  rows.reserve(idx.size());
  for (std::size_t i : idx) rows.push_back(pool[i]);
  return feature_matrix(rows);
}

double accuracy_of(const EncoderParams& params, const Tensor& features,
                   std::span<const int> labels) {
  const auto pred = predict(params, features);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == labels[i];
  return 100.0 * static_cast<double>(hit) / static_cast<double>(pred.size());
}

std::string describe(const StepState& s) {
  std::ostringstream os;
  os.precision(17);
  os << "step " << s.step << ": l_ce=" << s.losses.ce;
  const auto opt = [&](const char* name, const std::optional<double>& v) {
    os << ", " << name << "=";
    if (v) os << *v; else os << "absent";
  };
  opt("l_scl", s.losses.scl);
  opt("l_con", s.losses.con);
  opt("l_cc", s.losses.cc);
  os << ", alpha=" << s.alpha;
  return os.str();
}

}  // namespace

TrainResult train(const CorpusSplit& split, const Augmenter& augmenter,
                  const TrainConfig& config, const StepObserver& observer) {
  config.validate();
  if (split.labeled.empty()) throw ConfigError("labeled set is empty");
  if (split.unlabeled.empty()) throw ConfigError("unlabeled set is empty");
  const LossConfig& lc = config.loss;
  const bool use_unlabeled = lc.lambda2 != 0.0 || lc.lambda3 != 0.0;
  const std::size_t unlabeled_batch = std::min(config.unlabeled_batch, split.unlabeled.size());
  if (use_unlabeled && unlabeled_batch < 2) {
    throw ConfigError("unlabeled batch must hold at least 2 examples");
  }

  std::vector<int> labels;
  for (const auto& ex : split.labeled) {
    if (!ex.label || *ex.label < 0 ||
        static_cast<std::size_t>(*ex.label) >= config.dims.classes) {
      throw ConfigError("labeled example '" + ex.id + "' lacks a valid label");
    }
    labels.push_back(*ex.label);
  }
  std::vector<int> dev_labels;
  for (const auto& ex : split.dev) {
    if (!ex.label) throw ConfigError("dev example '" + ex.id + "' has no label");
    dev_labels.push_back(*ex.label);
  }

  const Featurizer& fz = config.featurizer;
  const auto labeled_fv = featurize_all(fz, split.labeled);
  const auto unlabeled_fv = featurize_all(fz, split.unlabeled);
  const Tensor dev_features =
      split.dev.empty() ? Tensor() : feature_matrix(featurize_all(fz, split.dev));

  TrainResult result;
  result.final_params = init_params(stream_seed(config.seed, SeedStream::kInit), config.dims, fz);
  EncoderParams& params = result.final_params;
  Adam optimizer(params.parameters(), config.adam);
  BatchSampler labeled_sampler(split.labeled.size(), config.labeled_batch,
                               stream_seed(config.seed, SeedStream::kLabeled));
  BatchSampler unlabeled_sampler(split.unlabeled.size(), unlabeled_batch,
                                 stream_seed(config.seed, SeedStream::kUnlabeled));
  const std::size_t T = config.max_steps;
  const std::size_t eval_every =
      config.eval_every ? config.eval_every : std::max<std::size_t>(1, T / 20);

  // Builds the step objective and fills in the logged components.
  const auto build_objective = [&](StepState& state) {
    const auto lab_idx = labeled_sampler.next();
    std::vector<int> batch_labels;
    for (std::size_t i : lab_idx) batch_labels.push_back(labels[i]);
    const Encoding lab = encode(params, rows_of(labeled_fv, lab_idx));

    Tensor total = ce_loss(lab.logits, batch_labels);
    state.losses.ce = total.item();
    if (lc.lambda1 != 0.0) {
      Tensor scl = scl_loss({lab.z, lab.logits, batch_labels}, lc.tau_scl);
      state.losses.scl = scl.item();
      total = add(total, scale(scl, lc.lambda1));
    }
    if (!use_unlabeled) return total;

    const auto un_idx = unlabeled_sampler.next();
    const std::size_t n = un_idx.size();
    std::vector<FeatureVector> rows;
    rows.reserve(2 * n);
    for (std::size_t i : un_idx) rows.push_back(unlabeled_fv[i]);
    for (std::size_t i : un_idx) {
      rows.push_back(fz(augmenter.augment(split.unlabeled[i], unlabeled_sampler.epoch())));
    }
    const Encoding enc = encode(params, feature_matrix(rows));
    std::vector<std::size_t> orig_rows(n), aug_rows(n);
    for (std::size_t i = 0; i < n; ++i) {
      orig_rows[i] = i;
      aug_rows[i] = n + i;
    }
    const UnlabeledPairBatch pair{take_rows(enc.z, orig_rows), take_rows(enc.z, aug_rows),
                                  take_rows(enc.logits, orig_rows),
                                  take_rows(enc.logits, aug_rows)};
    if (lc.lambda2 != 0.0) {
      Tensor con = consistency_loss(pair.orig_logits, pair.aug_logits);
      state.losses.con = con.item();
      total = add(total, scale(con, lc.lambda2));
    }
    if (lc.lambda3 != 0.0) {
      Tensor cc = cc_loss(pair, lc.tau_cc, lc.cc_stop_gradient);
      state.losses.cc = cc.item();
      // Logged but kept out of the graph while alpha is 0.
      if (state.alpha != 0.0) total = add(total, scale(cc, state.alpha * lc.lambda3));
    }
    return total;
  };

  for (std::size_t t = 1; t <= T; ++t) {
    StepState state;
    state.step = t;
    state.alpha = alpha_schedule(t, T);
    state.lr = lr_schedule(t, T, config.warmup_fraction, config.peak_lr);

    try {
      const Tensor total = build_objective(state);
      total_loss(state.losses, lc, state.alpha);
      state.total = total.item();
      if (!std::isfinite(state.total)) throw NumericFault("non-finite l_total");

      params.zero_grad();
      backward(total);
      optimizer.step(state.lr, config.weight_decay);
      result.steps.push_back(state);
      if (observer) observer(state, params);

      if (!split.dev.empty() && (t % eval_every == 0 || t == T)) {
        const double acc = accuracy_of(params, dev_features, dev_labels);
        result.dev_curve.push_back({t, acc});
        if (!result.best_dev_accuracy || acc > *result.best_dev_accuracy) {
          result.best_dev_accuracy = acc;
          result.best_step = t;
          result.best_params = params.clone();
        }
      }
    } catch (const NumericError& e) {
      throw NumericFault(std::string(e.what()) + "; " + describe(state));
    } catch (const NumericFault& e) {
      throw NumericFault(std::string(e.what()) + "; " + describe(state));
    }
  }
  if (!result.best_params.w1.defined()) {
    result.best_params = params.clone();
    result.best_step = T;
  }
  return result;
}

}  // namespace ftcc
