# Copyright 2026 The fedval-sim Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import numpy as np
import pytest
from scipy.stats import binom

import fedval

SMALL = {
    "task": {"classes": 3, "dim": 4, "train_samples": 300, "test_per_label": 10},
    "partition": {"client_count": 6, "seed": 2},
    "model": {"layer_sizes": [4, 6, 3], "seed": 3},
    "train": {"epochs": 1, "batch_size": 10, "learning_rate": 0.05, "seed": 4},
    "strategy": {"kind": "fedval"},
    "rounds": 3,
    "clients_per_round": 3,
    "selection_seed": 5,
    "validation": {"per_label": 3},
}


def test_gen_synthetic_shapes():
    x, y = fedval.gen_synthetic(4, 5, 101, 3.0, 7)
    assert x.shape == (101, 5)
    assert y.shape == (101,)
    assert sorted(np.bincount(y)) == [25, 25, 25, 26]
    x2, _ = fedval.gen_synthetic(4, 5, 101, 3.0, 7)
    np.testing.assert_array_equal(x, x2)


def test_model_round_trip():
    p = fedval.init_params([2, 3, 2], "relu", 7)
    assert len(p) == 17
    assert p == fedval.init_params([2, 3, 2], "relu", 7)
    probs = fedval.forward([0.0] * 17, [2, 3, 2], [0.5, -1.0])
    assert probs == pytest.approx([0.5, 0.5])


def test_mad_and_score():
    assert fedval.mad([1.0, 2.0, 3.0]) == pytest.approx(2.0 / 3.0)
    t = fedval.score([[1.0, 2.0], [3.0, 2.0]], [1.5, 2.5])
    assert t["raw"] == pytest.approx([41.0, 25.0])
    assert t["weights"] == pytest.approx([41.0 / 66.0, 25.0 / 66.0])
    same = fedval.score([[0.4] * 10] * 3, [0.4] * 3)
    assert same["raw"] == pytest.approx([105.0] * 3)
    assert fedval.s2_candidates(3.0) == [3.0, 3.5, 2.5, 0.5, 8.0]


def test_aggregators_and_clip():
    selected, _ = fedval.multi_krum([[1, 1], [1, 1], [101, 1], [1, 1]], 0.25)
    assert selected == [0, 1, 3]
    out = fedval.trimmed_mean([[0.0], [1.0], [2.0], [3.0], [100.0]], 0.2)
    assert out == pytest.approx([2.0])
    delta, clipped = fedval.clip([6.0, 8.0], 5.0)
    assert clipped and delta == pytest.approx([3.0, 4.0])


def test_tail_probability_matches_scipy():
    per_round, once = fedval.malicious_round_probability(30, 0.1, 9, 25000)
    assert per_round == pytest.approx(binom.sf(8, 30, 0.1), rel=1e-9)
    assert once > 0.99
    assert fedval.default_k0(30, 0.4) == 9


def test_run_experiment_is_deterministic():
    a = fedval.run_experiment(SMALL)
    b = fedval.run_experiment(SMALL, workers=2)
    assert a["final_model"] == b["final_model"]
    assert len(a["metrics"]) == 3
    assert a["rounds"][0]["round"] == 1
    assert len(a["config_hash"]) == 16
    assert all(math.isfinite(m["overall_accuracy"]) for m in a["metrics"])


def test_config_errors_raise():
    bad = dict(SMALL, clients_per_round=9)
    with pytest.raises(ValueError, match="clients_per_round"):
        fedval.run_experiment(bad)
    with pytest.raises(ValueError, match="task.clases"):
        fedval.config_hash('{"task": {"clases": 3}}')
