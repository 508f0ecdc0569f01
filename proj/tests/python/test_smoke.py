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


import math

import numpy as np
import pytest

import ftcc


def unit_rows(rng, n, d):
    x = rng.normal(size=(n, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def log_softmax(x):
    x = x - x.max(axis=-1, keepdims=True)
    return x - np.log(np.exp(x).sum(axis=-1, keepdims=True))


def test_featurize_is_deterministic():
    a = ftcc.featurize("the cat sat", dim=64)
    assert a.shape == (64,)
    assert np.array_equal(a, ftcc.featurize("the cat sat", dim=64))
    assert a.sum() == pytest.approx(5.0)


def test_lexical_noise_identity_and_floor():
    assert ftcc.lexical_noise("a b c", 0.0, 0.0, 3) == "a b c"
    assert ftcc.lexical_noise("solo", 1.0, 0.0, 3) == "solo"


def test_schedules():
    assert ftcc.alpha_schedule(50, 100) == 0.0
    assert ftcc.alpha_schedule(75, 100) == 0.5
    assert ftcc.alpha_schedule(100, 100) == 1.0
    assert ftcc.lr_schedule(0, 100, 0.1, 1e-3) == 0.0
    assert ftcc.lr_schedule(10, 100, 0.1, 1e-3) == 1e-3
    assert ftcc.lr_schedule(100, 100, 0.1, 1e-3) == 0.0
    with pytest.raises(ftcc.Error):
        ftcc.alpha_schedule(101, 100)


def test_ce_loss_matches_numpy():
    rng = np.random.default_rng(0)
    logits = rng.normal(size=(5, 3))
    labels = [0, 2, 1, 1, 0]
    value, grad = ftcc.ce_loss(logits, labels)
    ls = log_softmax(logits)
    assert value == pytest.approx(-np.mean(ls[np.arange(5), labels]), abs=1e-12)
    onehot = np.eye(3)[labels]
    assert np.allclose(grad, (np.exp(ls) - onehot) / 5, atol=1e-12)


def test_scl_loss_matches_numpy():
    rng = np.random.default_rng(1)
    z = unit_rows(rng, 6, 4)
    labels = [0, 0, 1, 1, 1, 2]
    tau = 0.5
    value, _ = ftcc.scl_loss(z, labels, tau)
    total = 0.0
    for i in range(6):
        pos = [j for j in range(6) if j != i and labels[j] == labels[i]]
        if not pos:
            continue
        others = [k for k in range(6) if k != i]
        lse = math.log(sum(math.exp(z[i] @ z[k] / tau) for k in others))
        total += -sum(z[i] @ z[j] / tau - lse for j in pos) / len(pos)
    assert value == pytest.approx(total, abs=1e-10)


def test_kl_terms_vanish_on_identical_views():
    rng = np.random.default_rng(2)
    logits = rng.normal(size=(4, 3))
    value, _ = ftcc.consistency_loss(logits, logits.copy())
    assert abs(value) <= 1e-12
    z = unit_rows(rng, 4, 5)
    value, grad = ftcc.cc_loss(z, z.copy(), 0.1)
    assert abs(value) <= 1e-12
    assert np.allclose(grad, 0.0, atol=1e-12)


def test_gradient_suite_within_tolerance():
    errors = ftcc.gradient_suite(instances=3, seed=5)
    assert errors
    assert max(errors.values()) <= 1e-4


def test_split_and_aggregate():
    pool = ftcc.synthetic_corpus(200, 4)
    split = ftcc.make_split(pool, num_classes=2, k=5, unlabeled=60, dev=40, seed=9)
    assert [sum(r["label"] == c for r in split["labeled"]) for c in (0, 1)] == [5, 5]
    assert len(split["unlabeled"]) == 60 and len(split["dev"]) == 40
    ids = [r["id"] for part in split.values() for r in part]
    assert len(ids) == len(set(ids))
    mean, sem, text = ftcc.aggregate([90.0, 92.0, 94.0])
    assert mean == pytest.approx(92.0)
    assert sem == pytest.approx(2.0 / math.sqrt(3))
    assert text.startswith("92.00")


def test_train_predict_round_trip(tmp_path):
    pool = ftcc.synthetic_corpus(300, 4)
    split = ftcc.make_split(pool, num_classes=2, k=10, unlabeled=100, dev=40, seed=1)
    config = {"max_step": 40, "F": 256, "h": 16, "d": 8, "learning_rate": 0.003, "eval_every": 10}
    model = ftcc.train(split, ["topic_a", "topic_b"], config)
    assert model.labels == ["topic_a", "topic_b"]
    texts = [r["text"] for r in split["dev"]]
    preds = model.predict(texts)
    assert len(preds) == len(texts) and set(preds) <= {0, 1}
    z = model.embed(texts)
    assert z.shape == (len(texts), 8)
    assert np.allclose(np.linalg.norm(z, axis=1), 1.0)
    path = tmp_path / "model.json"
    model.save(path)
    again = ftcc.Model.load(path)
    assert again.predict(texts) == preds
    assert again.accuracy(split["dev"]) == model.accuracy(split["dev"])


def test_run_cli_reports_usage_errors():
    code, _, err = ftcc.run_cli(["no-such-command"])
    assert code != 0
    assert err
