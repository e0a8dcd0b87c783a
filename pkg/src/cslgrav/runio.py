"""Config ingestion, CSV series emission, and run manifests for the CLI.

Configs are JSON.  Every dimensioned input is a {"value": x, "unit": "..."}
pair whose unit string must parse and match the expected dimension; plain
numbers are accepted only where a dimensionless count is expected.  Errors
carry the offending field path.

Series files are CSV: UTF-8, LF line endings, header row of column names
with bracketed units, reals at 17 significant digits -- byte-deterministic
for a given series.

The manifest is JSON: config echo, tool version, timestamp, seed, backend,
per-result summary rows (estimate, stderr, target formula id and rendered
formula text, target value, tolerance, pass flag), and the list of files the
run wrote.  Timestamps aside, reruns with the same config and seed write
byte-identical data files.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .quantities import DimensionError, parse_unit

__all__ = [
    "ConfigError",
    "read_config",
    "config_quantity",
    "config_value",
    "emit_series",
    "SummaryRow",
    "write_manifest",
    "all_rows_pass",
]


class ConfigError(ValueError):
    """Invalid run configuration; message includes the field path."""


def read_config(path: str | Path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config root must be a JSON object: {path}")
    return data


def _lookup(block: dict, path: str):
    node: Any = block
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            return None
        node = node[part]
    return node


def config_quantity(
    block: dict,
    path: str,
    expected_unit: str,
    default: float | None = None,
) -> float:
    """Fetch a dimensioned entry as a float in ``expected_unit``.

    The entry must be {"value": number, "unit": string}; its unit must have
    the dimension of ``expected_unit``.  All supported unit tokens are plain
    CGS composites ("erg" is exactly g*cm^2/s^2), so a dimension match means
    the value carries over unchanged.
    """
    node = _lookup(block, path)
    if node is None:
        if default is not None:
            return default
        raise ConfigError(f"{path}: missing required entry (unit {expected_unit})")
    if not isinstance(node, dict) or "value" not in node or "unit" not in node:
        raise ConfigError(
            f'{path}: expected {{"value": ..., "unit": "{expected_unit}"}}'
        )
    try:
        value = float(node["value"])
    except (TypeError, ValueError):
        raise ConfigError(f"{path}.value: not a number: {node['value']!r}") from None
    try:
        dim = parse_unit(str(node["unit"]))
        expected_dim = parse_unit(expected_unit)
    except DimensionError as exc:
        raise ConfigError(f"{path}.unit: {exc}") from None
    if dim != expected_dim:
        raise ConfigError(
            f"{path}.unit: {node['unit']!r} has the wrong dimension "
            f"(expected {expected_unit!r})"
        )
    return value


def config_value(
    block: dict,
    path: str,
    kind: type = float,
    default=None,
):
    """Fetch a dimensionless entry (count, flag, name)."""
    node = _lookup(block, path)
    if node is None:
        if default is not None:
            return default
        raise ConfigError(f"{path}: missing required entry")
    if isinstance(node, dict):
        raise ConfigError(f"{path}: expected a plain {kind.__name__}, got an object")
    try:
        return kind(node)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: cannot read as {kind.__name__}: {node!r}") from None


def emit_series(
    path: str | Path,
    columns: Sequence[tuple[str, str]],
    rows: np.ndarray,
) -> Path:
    """Write a series as CSV with a "name [unit]" header per column."""
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    if rows.size == 0:
        raise ValueError("refusing to write an empty series")
    if rows.shape[1] != len(columns):
        raise ValueError(
            f"series has {rows.shape[1]} columns but {len(columns)} names given"
        )
    path = Path(path)
    header = ", ".join(f"{name} [{unit}]" for name, unit in columns)
    lines = [header]
    for row in rows:
        lines.append(", ".join(f"{v:.17g}" for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


@dataclass(frozen=True)
class SummaryRow:
    """One checked (or informational) result in the manifest."""

    name: str                     # stable identifier of the target formula
    formula: str                  # the target formula, rendered as text
    value: float
    stderr: float | None = None
    target: float | None = None
    tolerance: float | None = None  # absolute; row passes iff |value-target| <= tolerance

    @property
    def passed(self) -> bool | None:
        if self.target is None or self.tolerance is None:
            return None
        return bool(abs(self.value - self.target) <= self.tolerance)


def all_rows_pass(rows: Sequence[SummaryRow]) -> bool:
    return all(row.passed is not False for row in rows)


def write_manifest(
    path: str | Path,
    *,
    command: str,
    config: dict,
    seed: int,
    backend: str | None,
    workers: int,
    rows: Sequence[SummaryRow],
    outputs: Sequence[str | Path],
    check: bool,
) -> dict:
    def row_dict(row: SummaryRow) -> dict:
        d = asdict(row)
        d["passed"] = row.passed
        return d

    manifest = {
        "tool": "cslgrav",
        "version": __version__,
        "command": command,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "seed": int(seed),
        "backend": backend,
        "workers": int(workers),
        "config": config,
        "results": [row_dict(r) for r in rows],
        "outputs": [str(Path(p).name) for p in outputs],
        "check": {"enabled": check, "passed": all_rows_pass(rows)},
    }
    path = Path(path)
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest
