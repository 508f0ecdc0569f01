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
#include <functional>
#include <string>
#include <vector>

#include "ftcc/tensor.hpp"

namespace ftcc {

// Relative error between an analytic and a numeric gradient of one tensor:
//   |a - n|_2 / max(|a|_2, |n|_2)
// and 0 when both norms are below 1e-10.
double relative_error(std::span<const double> analytic, std::span<const double> numeric);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::vector<double> per_leaf;  // one entry per checked leaf
};

// Compares backward() against central differences (step h) for every element
// of every leaf. `loss_fn` must rebuild the graph from the leaves' current
// values on each call. Leaf values are restored afterwards.
GradCheckResult check_gradients(const std::function<Tensor()>& loss_fn,
                                std::vector<Tensor> leaves, double h = 1e-5);

struct GradSuiteEntry {
  std::string name;
  double max_rel_error = 0.0;
  int instances = 0;
};

// Random-instance suite over ce, scl, con, cc and the encoder (batch <= 8,
// embedding dim <= 8, classes <= 4, inputs uniform in [-2, 2]).
std::vector<GradSuiteEntry> run_gradient_suite(int instances, std::uint64_t seed);

}  // namespace ftcc
