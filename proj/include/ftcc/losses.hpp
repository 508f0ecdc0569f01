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

// The four training objectives over batches of encoder outputs:
//
//   ce   mean negative log-likelihood of the true class
//   scl  supervised contrastive loss over a labeled batch
//   con  KL(p(y | x) || p(y | a(x))) with the original side detached
//   cc   KL(P || Q) between similarity distributions of an original and
//        its augmentation against the other 2(N-1) batch members
//
// Each function returns a scalar graph node so the trainer can combine and
// differentiate them.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ftcc/tensor.hpp"

namespace ftcc {

struct LossConfig {
  double tau_scl = 0.1;
  double tau_cc = 0.1;
  double lambda1 = 1.0;  // scl
  double lambda2 = 1.0;  // con
  double lambda3 = 1.0;  // cc, additionally gated by alpha
  // Detach P (the original view) in cc. false gives the symmetric variant.
  bool cc_stop_gradient = true;

  void validate() const;
};

struct LabeledBatch {
  Tensor embeddings;  // [N x d], unit rows
  Tensor logits;      // [N x C]
  std::vector<int> labels;
};

struct UnlabeledPairBatch {
  Tensor orig_embeddings;  // [N x d], unit rows
  Tensor aug_embeddings;   // [N x d], row i pairs with orig row i
  Tensor orig_logits;      // [N x C]
  Tensor aug_logits;       // [N x C]
};

Tensor ce_loss(const Tensor& logits, std::span<const int> labels);

// Sum over anchors i of
//   -1/(N_{y_i} - 1) * sum_{j != i, y_j = y_i} log softmax_{k != i}(z_i . z_k / tau)[j]
// Anchors whose class occurs once in the batch contribute nothing.
Tensor scl_loss(const LabeledBatch& batch, double tau_scl);

// Batch mean of KL(softmax(orig) || softmax(aug)); orig is detached.
Tensor consistency_loss(const Tensor& orig_logits, const Tensor& aug_logits);

// Negative set of anchor i over the 2N stacked rows [originals; augmentations]:
// originals 0..N-1 except i, then augmentations N..2N-1 except N+i, ascending.
std::vector<std::size_t> cc_negative_indices(std::size_t batch_size, std::size_t anchor);

struct CcDistributions {
  std::vector<double> p;  // from the original view
  std::vector<double> q;  // from the augmented view
};
CcDistributions cc_distributions(const UnlabeledPairBatch& batch, std::size_t anchor,
                                 double tau_cc);

// Batch mean over anchors of KL(P_i || Q_i).
Tensor cc_loss(const UnlabeledPairBatch& batch, double tau_cc, bool stop_gradient_p = true);

// cc with P taken (detached) from `target` and Q from `batch`. Equal to the
// stop-gradient cc_loss when target holds the same values as batch; lets a
// finite-difference probe hold the detached side fixed.
Tensor cc_loss_with_target(const UnlabeledPairBatch& target, const UnlabeledPairBatch& batch,
                           double tau_cc);

}  // namespace ftcc
