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
"""Reader for the toolkit's CSV outputs.

Files start with ``# qbatt-schema v1``, then a header row. Empty fields are
nulls and come back as ``None``.
"""

from __future__ import annotations

import csv
import io
import os
from typing import Dict, Iterable, List, Optional, Union

SCHEMA_LINE = "# qbatt-schema v1"

Table = Dict[str, List[Optional[float]]]


class SchemaError(ValueError):
    """Input does not follow the qbatt-schema v1 layout."""


def parse_table(text: str) -> Table:
    lines = text.splitlines(keepends=True)
    if not lines or lines[0].rstrip("\r\n") != SCHEMA_LINE:
        raise SchemaError(f"missing schema line {SCHEMA_LINE!r}")
    rows = list(csv.reader(io.StringIO("".join(lines[1:]))))
    if not rows:
        raise SchemaError("missing header row")
    header, body = rows[0], rows[1:]
    if not body:
        raise SchemaError("table has no data rows")
    table: Table = {name: [] for name in header}
    for lineno, row in enumerate(body, start=3):
        if len(row) != len(header):
            raise SchemaError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        for name, cell in zip(header, row):
            if cell == "":
                table[name].append(None)
                continue
            try:
                table[name].append(float(cell))
            except ValueError as exc:
                raise SchemaError(f"line {lineno}: column {name!r} is not numeric") from exc
    return table


def read_table(path: Union[str, os.PathLike]) -> Table:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_table(fh.read())


def require_columns(table: Table, columns: Iterable[str]) -> None:
    for name in columns:
        if name not in table:
            raise SchemaError(f"missing column {name!r}")
