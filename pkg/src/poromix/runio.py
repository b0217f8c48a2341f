"""
On-disk output formats: field snapshots and the run metadata document.

A snapshot file is one JSON header line (domain, resolution, time, field
name) followed by the raw row-major IEEE-754 little-endian float64 nodal
values, length M*M.  The ledger CSV format lives with EnergyLedger.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .domain import Domain

__all__ = ["write_snapshot", "read_snapshot", "write_metadata"]


def write_snapshot(path, field_name: str, t: float, domain: Domain, values: np.ndarray):
    """Write one scalar grid field; values must be (M, M)."""
    M = domain.grid.M
    v = np.ascontiguousarray(np.asarray(values, dtype="<f8"))
    if v.shape != (M, M):
        raise ValueError(f"snapshot values must be ({M}, {M}), got {v.shape}")
    header = {
        "field": field_name,
        "t": float(t),
        "Lx": domain.spec.Lx,
        "Ly": domain.spec.Ly,
        "M": M,
        "layout": "row-major x-major",
        "dtype": "<f8",
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8") + b"\n")
        fh.write(v.tobytes(order="C"))


def read_snapshot(path):
    """Read a snapshot back; returns (header dict, (M, M) array)."""
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        M = int(header["M"])
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != M * M:
        raise ValueError(f"snapshot payload has {data.size} values, expected {M * M}")
    return header, data.reshape(M, M).copy()


def _jsonable(value):
    if isinstance(value, float) and math.isinf(value):
        return "unbounded"
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def write_metadata(path, document: dict):
    """Serialize the run metadata (outcome, timings, horizon report, echo)."""
    Path(path).write_text(json.dumps(_jsonable(document), indent=2, sort_keys=True) + "\n")
