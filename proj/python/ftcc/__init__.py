# Copyright 2026 The ftcc Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Semi-supervised few-shot text classification (C++ core)."""

from ._ftcc import (
    Error,
    Model,
    NumericFault,
    aggregate,
    alpha_schedule,
    cc_loss,
    ce_loss,
    consistency_loss,
    featurize,
    gradient_suite,
    lexical_noise,
    lr_schedule,
    make_split,
    run_cli,
    scl_loss,
    synthetic_corpus,
    train,
)

__all__ = [
    "Error",
    "Model",
    "NumericFault",
    "aggregate",
    "alpha_schedule",
    "cc_loss",
    "ce_loss",
    "consistency_loss",
    "featurize",
    "gradient_suite",
    "lexical_noise",
    "lr_schedule",
    "make_split",
    "run_cli",
    "scl_loss",
    "synthetic_corpus",
    "train",
]
