#
# Copyright 2026 The dpbyz Authors
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
#
"""Python bindings for the dpbyz simulator."""

from dpbyz._dpbyz import (
    ConfigError,
    InfeasibleError,
    accountant_epsilon,
    config_keys,
    default_delta,
    first_stage_check,
    ks_test,
    norm_bounds,
    parse_config,
    run,
    solve_sigma,
)

__all__ = [
    "ConfigError",
    "InfeasibleError",
    "accountant_epsilon",
    "config_keys",
    "default_delta",
    "first_stage_check",
    "ks_test",
    "norm_bounds",
    "parse_config",
    "run",
    "solve_sigma",
]
