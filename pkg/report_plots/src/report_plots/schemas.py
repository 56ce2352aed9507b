"""Readers for the experiment CLI's CSV/JSON outputs.

Every figure is a pure file-to-file transform, so this module is the only
place that touches input data: strict header checks, typed columns, and the
manifest hash that gets embedded in each figure.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from dataclasses import dataclass

import numpy as np

RECORD_COLUMNS = (
    "path_id",
    "stream_id",
    "exit_time",
    "exit_position",
    "pre_jump_position",
    "n_large_jumps",
    "exited_at_large_jump",
    "censored",
)

SWEEP_COLUMNS = (
    "eps",
    "n_paths",
    "mean",
    "ci_low",
    "ci_high",
    "ks_statistic",
    "big_jump_exit_fraction",
    "censored_count",
    "theory_mean",
    "ratio",
)

DEVIATION_COLUMNS = (
    "eps",
    "level",
    "estimate",
    "ci_low",
    "ci_high",
    "n_paths",
    "n_exceed",
)


class SchemaError(Exception):
    """Raised when an input file is missing or does not match its schema."""


def _read_rows(path: str, columns) -> list:
    if not os.path.isfile(path):
        raise SchemaError(f"missing input file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if tuple(header) != tuple(columns):
            raise SchemaError(
                f"{path}: header {header!r} does not match expected {list(columns)!r}"
            )
        rows = [row for row in reader if row]
    for row in rows:
        if len(row) != len(columns):
            raise SchemaError(f"{path}: row with {len(row)} cells, expected {len(columns)}")
    return rows


@dataclass(frozen=True)
class Records:
    """Typed view of records.csv."""

    exit_time: np.ndarray
    exit_position: np.ndarray
    pre_jump_position: np.ndarray  # NaN where the record has no pre-jump point
    n_large_jumps: np.ndarray
    exited_at_large_jump: np.ndarray
    censored: np.ndarray

    @property
    def n(self) -> int:
        return len(self.exit_time)

    def uncensored_times(self) -> np.ndarray:
        return self.exit_time[~self.censored]

    def big_jump_pre_positions(self) -> np.ndarray:
        keep = self.exited_at_large_jump & ~self.censored
        return self.pre_jump_position[keep]


def read_records(path: str) -> Records:
    rows = _read_rows(path, RECORD_COLUMNS)
    if not rows:
        raise SchemaError(f"{path}: no data rows")

    def col(i):
        return [row[i] for row in rows]

    try:
        return Records(
            exit_time=np.array([float(v) for v in col(2)]),
            exit_position=np.array([float(v) for v in col(3)]),
            pre_jump_position=np.array(
                [float(v) if v != "" else math.nan for v in col(4)]
            ),
            n_large_jumps=np.array([int(v) for v in col(5)]),
            exited_at_large_jump=np.array([v == "1" for v in col(6)]),
            censored=np.array([v == "1" for v in col(7)]),
        )
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from None


@dataclass(frozen=True)
class SweepTable:
    """Typed view of sweep.csv, one entry per eps row."""

    eps: np.ndarray
    n_paths: np.ndarray
    mean: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    big_jump_exit_fraction: np.ndarray
    theory_mean: np.ndarray

    @property
    def n_rows(self) -> int:
        return len(self.eps)

    def empirical_mask(self) -> np.ndarray:
        return np.isfinite(self.mean)


def read_sweep(path: str) -> SweepTable:
    rows = _read_rows(path, SWEEP_COLUMNS)
    if not rows:
        raise SchemaError(f"{path}: no data rows")

    def fcol(i):
        return np.array([float(row[i]) if row[i] != "" else math.nan for row in rows])

    try:
        return SweepTable(
            eps=fcol(0),
            n_paths=np.array([int(row[1]) for row in rows]),
            mean=fcol(2),
            ci_low=fcol(3),
            ci_high=fcol(4),
            big_jump_exit_fraction=fcol(6),
            theory_mean=fcol(8),
        )
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from None


@dataclass(frozen=True)
class DeviationTable:
    """Typed view of deviation.csv."""

    eps: np.ndarray
    level: np.ndarray
    estimate: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    n_paths: np.ndarray


def read_deviation(path: str) -> DeviationTable:
    rows = _read_rows(path, DEVIATION_COLUMNS)
    if not rows:
        raise SchemaError(f"{path}: no data rows")

    def fcol(i):
        return np.array([float(row[i]) for row in rows])

    try:
        return DeviationTable(
            eps=fcol(0),
            level=fcol(1),
            estimate=fcol(2),
            ci_low=fcol(3),
            ci_high=fcol(4),
            n_paths=np.array([int(row[5]) for row in rows]),
        )
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from None


def read_summary(path: str) -> dict:
    if not os.path.isfile(path):
        raise SchemaError(f"missing input file: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: {exc}") from None
    if "config" not in payload:
        raise SchemaError(f"{path}: summary JSON lacks a 'config' block")
    return payload


def manifest_hash(path: str) -> str:
    """sha256 hex digest of the run manifest bytes."""
    if not os.path.isfile(path):
        raise SchemaError(f"missing input file: {path}")
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()
