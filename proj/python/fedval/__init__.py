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
"""Federated learning simulator with validation-score aggregation."""

import json as _json

from fedval._core import (
    ConfigError,
    __version__,
    clip,
    config_hash,
    default_k0,
    forward,
    gen_synthetic,
    init_params,
    mad,
    malicious_round_probability,
    multi_krum,
    s2_candidates,
    score,
    trimmed_mean,
)
from fedval._core import run_experiment as _run_experiment


def run_experiment(config, workers=1):
    """Runs an experiment. `config` is a dict or a JSON string."""
    text = config if isinstance(config, str) else _json.dumps(config)
    result = _run_experiment(text, workers)
    result["rounds"] = [_json.loads(r) for r in result["rounds"]]
    return result


__all__ = [
    "ConfigError",
    "clip",
    "config_hash",
    "default_k0",
    "forward",
    "gen_synthetic",
    "init_params",
    "mad",
    "malicious_round_probability",
    "multi_krum",
    "run_experiment",
    "s2_candidates",
    "score",
    "trimmed_mean",
]
