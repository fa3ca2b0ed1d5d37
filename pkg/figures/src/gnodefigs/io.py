"""Readers for the result-file formats the figures consume.

Each reader validates the columns or keys it needs and fails with a
SchemaError naming the file and the first missing one. Extra columns are
allowed everywhere so upstream formats can grow.
"""

import csv
import json

import numpy as np

from .errors import SchemaError

__all__ = ["read_columns", "read_fixed_points", "read_mixed",
           "read_trial_traces"]


def read_columns(path, names, numeric=True) -> dict:
    """Columns of a headered CSV as arrays, keyed by name."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise SchemaError(f"cannot read: {exc}", str(path)) from exc
    if not rows:
        raise SchemaError("no data rows", str(path))
    for name in names:
        if name not in rows[0]:
            raise SchemaError(f"missing column {name!r}", str(path), name)
    out = {}
    for name in names:
        raw = [r[name] for r in rows]
        if not numeric:
            out[name] = raw
            continue
        try:
            out[name] = np.array([float(v) for v in raw])
        except ValueError as exc:
            raise SchemaError(f"column {name!r} is not numeric: {exc}",
                              str(path), name) from exc
    return out


def read_mixed(path, numeric, text) -> dict:
    got = read_columns(path, list(numeric) + list(text), numeric=False)
    out = {name: got[name] for name in text}
    for name in numeric:
        try:
            out[name] = np.array([float(v) for v in got[name]])
        except ValueError as exc:
            raise SchemaError(f"column {name!r} is not numeric: {exc}",
                              str(path), name) from exc
    return out


def read_fixed_points(path) -> list[dict]:
    """Fixed-point records from JSONL; abscissa may be null."""
    records = []
    try:
        with open(path) as fh:
            lines = [ln for ln in fh if ln.strip()]
    except OSError as exc:
        raise SchemaError(f"cannot read: {exc}", str(path)) from exc
    for i, line in enumerate(lines):
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"line {i + 1} is not JSON: {exc}", str(path)) from exc
        for key in ("location", "abscissa", "class"):
            if key not in rec:
                raise SchemaError(f"record {i + 1} missing key {key!r}",
                                  str(path), key)
        records.append(rec)
    return records


def read_trial_traces(path) -> list[np.ndarray]:
    """Per-trial 2-d output traces (y1, y2) from a trial-batch CSV."""
    cols = read_mixed(path, numeric=("bin", "y1", "y2"), text=("trial",))
    traces = []
    for trial in sorted(set(cols["trial"]), key=int):
        sel = np.array([t == trial for t in cols["trial"]])
        order = np.argsort(cols["bin"][sel])
        traces.append(np.column_stack([cols["y1"][sel][order],
                                       cols["y2"][sel][order]]))
    return traces
