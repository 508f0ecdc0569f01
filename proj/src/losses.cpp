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

#include "ftcc/losses.hpp"

#include <cmath>
#include <string>

#include "ftcc/error.hpp"

namespace ftcc {

void LossConfig::validate() const {
  if (!(tau_scl > 0.0) || !(tau_cc > 0.0)) throw ConfigError("temperatures must be positive");
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || !(lambda3 >= 0.0)) {
    throw ConfigError("loss weights must be nonnegative");
  }
}

namespace {

void require_unit_rows(const Tensor& z, const char* op) {
  const std::size_t n = z.cols();
  const auto v = z.data();
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < n; ++j) sq += v[i * n + j] * v[i * n + j];
    if (std::abs(std::sqrt(sq) - 1.0) > 1e-8) {
      throw ContractError(std::string(op) + ": embedding row " + std::to_string(i) +
                          " is not unit norm");
    }
  }
}

// Row i of the output holds sim[i, k] for every k != i, ascending.
Tensor off_diagonal(const Tensor& sim) {
  const std::size_t n = sim.rows();
  std::vector<std::size_t> idx;
  idx.reserve(n * (n - 1));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (k != i) idx.push_back(i * n + k);
  return gather(sim, idx, {n, n - 1});
}

// [N x 2(N-1)] similarities of `anchors` against each anchor's negatives.
Tensor negative_similarities(const Tensor& anchors, const Tensor& stacked) {
  const std::size_t n = anchors.rows();
  Tensor sim = matmul(anchors, transpose(stacked));  // [N x 2N]
  std::vector<std::size_t> idx;
  idx.reserve(n * 2 * (n - 1));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k : cc_negative_indices(n, i)) idx.push_back(i * 2 * n + k);
  return gather(sim, idx, {n, 2 * (n - 1)});
}

void check_pair_batch(const UnlabeledPairBatch& b) {
  if (b.orig_embeddings.rank() != 2 || b.orig_embeddings.shape() != b.aug_embeddings.shape()) {
    throw ContractError("cc: original and augmented embeddings must be equal-shape matrices");
  }
  if (b.orig_embeddings.rows() < 2) {
    throw ContractError("cc: batch needs at least 2 pairs so the negative set is non-empty");
  }
  require_unit_rows(b.orig_embeddings, "cc");
  require_unit_rows(b.aug_embeddings, "cc");
}

}  // namespace

Tensor ce_loss(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2) throw DimensionError("ce_loss: logits must be [N x C]");
  const std::size_t n = logits.rows(), c = logits.cols();
  if (n == 0) throw ContractError("ce_loss: empty batch");
  if (labels.size() != n) throw ContractError("ce_loss: label count differs from batch size");
  std::vector<double> weights(n * c, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= c) {
      throw ContractError("ce_loss: label " + std::to_string(labels[i]) + " out of range");
    }
    weights[i * c + static_cast<std::size_t>(labels[i])] = -1.0 / static_cast<double>(n);
  }
  return weighted_sum(log_softmax(logits), weights);
}

Tensor scl_loss(const LabeledBatch& batch, double tau_scl) {
  const Tensor& z = batch.embeddings;
  if (z.rank() != 2) throw DimensionError("scl_loss: embeddings must be [N x d]");
  const std::size_t n = z.rows();
  if (n < 2) throw ContractError("scl_loss: batch needs at least 2 examples");
  if (batch.labels.size() != n) throw ContractError("scl_loss: label count differs from N");
  require_unit_rows(z, "scl_loss");

  // weights over the [N x (N-1)] log-probability matrix
  std::vector<double> weights(n * (n - 1), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t same = 0;
    for (std::size_t j = 0; j < n; ++j) same += batch.labels[j] == batch.labels[i];
    if (same < 2) continue;
    const double w = -1.0 / static_cast<double>(same - 1);
    std::size_t col = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      if (batch.labels[k] == batch.labels[i]) weights[i * (n - 1) + col] = w;
      ++col;
    }
  }
  Tensor sim = matmul(z, transpose(z));
  return weighted_sum(log_softmax(off_diagonal(sim), tau_scl), weights);
}

Tensor consistency_loss(const Tensor& orig_logits, const Tensor& aug_logits) {
  if (orig_logits.rank() != 2 || orig_logits.shape() != aug_logits.shape()) {
    throw ContractError("consistency_loss: logit batches must have equal [N x C] shapes");
  }
  const double n = static_cast<double>(orig_logits.rows());
  Tensor p = softmax(stop_gradient(orig_logits));
  return scale(kl_div(p, log_softmax(aug_logits)), 1.0 / n);
}

std::vector<std::size_t> cc_negative_indices(std::size_t batch_size, std::size_t anchor) {
  if (batch_size < 2) throw ContractError("cc: batch needs at least 2 pairs");
  if (anchor >= batch_size) throw ContractError("cc: anchor out of range");
  std::vector<std::size_t> out;
  out.reserve(2 * (batch_size - 1));
  for (std::size_t j = 0; j < batch_size; ++j)
    if (j != anchor) out.push_back(j);
  for (std::size_t j = 0; j < batch_size; ++j)
    if (j != anchor) out.push_back(batch_size + j);
  return out;
}

CcDistributions cc_distributions(const UnlabeledPairBatch& batch, std::size_t anchor,
                                 double tau_cc) {
  check_pair_batch(batch);
  const std::size_t n = batch.orig_embeddings.rows();
  if (anchor >= n) throw ContractError("cc: anchor out of range");
  const std::size_t idx[] = {anchor};
  Tensor stacked = concat_rows(batch.orig_embeddings, batch.aug_embeddings);
  const auto negs = cc_negative_indices(n, anchor);
  Tensor negatives = take_rows(stacked, negs);
  const auto sims = [&](const Tensor& rows) {
    return softmax(matmul(take_rows(rows, idx), transpose(negatives)), tau_cc);
  };
  Tensor p = sims(batch.orig_embeddings);
  Tensor q = sims(batch.aug_embeddings);
  return {{p.data().begin(), p.data().end()}, {q.data().begin(), q.data().end()}};
}

Tensor cc_loss(const UnlabeledPairBatch& batch, double tau_cc, bool stop_gradient_p) {
  check_pair_batch(batch);
  const double n = static_cast<double>(batch.orig_embeddings.rows());
  Tensor stacked = concat_rows(batch.orig_embeddings, batch.aug_embeddings);
  Tensor p_sim = negative_similarities(batch.orig_embeddings, stacked);
  if (stop_gradient_p) p_sim = stop_gradient(p_sim);
  Tensor p = softmax(p_sim, tau_cc);
  Tensor log_q = log_softmax(negative_similarities(batch.aug_embeddings, stacked), tau_cc);
  return scale(kl_div(p, log_q), 1.0 / n);
}

Tensor cc_loss_with_target(const UnlabeledPairBatch& target, const UnlabeledPairBatch& batch,
                           double tau_cc) {
  check_pair_batch(target);
  check_pair_batch(batch);
  if (target.orig_embeddings.shape() != batch.orig_embeddings.shape()) {
    throw ContractError("cc: target and batch shapes differ");
  }
  const double n = static_cast<double>(batch.orig_embeddings.rows());
  Tensor target_stacked = concat_rows(target.orig_embeddings, target.aug_embeddings);
  Tensor p = softmax(
      stop_gradient(negative_similarities(target.orig_embeddings, target_stacked)), tau_cc);
  Tensor stacked = concat_rows(batch.orig_embeddings, batch.aug_embeddings);
  Tensor log_q = log_softmax(negative_similarities(batch.aug_embeddings, stacked), tau_cc);
  return scale(kl_div(p, log_q), 1.0 / n);
}

}  // namespace ftcc
