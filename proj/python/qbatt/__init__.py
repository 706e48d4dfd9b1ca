# Copyright 2026 The qbatt Authors
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
"""Spin-chain quantum battery simulation toolkit."""

from ._core import (
    ConfigError,
    QbattError,
    __version__,
    charge,
    driving_potential,
    effective_coupling,
    ergotropy,
    eta,
    fair_alpha,
    readout_roundtrip,
    renyi2,
    run_command,
)
from .schema import SCHEMA_LINE, SchemaError, read_table, require_columns

__all__ = [
    "ConfigError",
    "QbattError",
    "SCHEMA_LINE",
    "SchemaError",
    "__version__",
    "charge",
    "driving_potential",
    "effective_coupling",
    "ergotropy",
    "eta",
    "fair_alpha",
    "read_table",
    "readout_roundtrip",
    "renyi2",
    "require_columns",
    "run_command",
]
