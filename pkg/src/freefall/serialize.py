"""JSON, JSON-lines and CSV emission.

Floats are written with Python's shortest round-trip representation, so a
value read back is bit-identical to the value written. Keys are sorted so
that output is byte-identical across runs.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .heatflow import FlowTrajectory


def to_plain(obj):
    """Recursively convert numpy scalars/arrays and non-string keys for ``json``."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(obj, indent: int | None = 2) -> str:
    return json.dumps(to_plain(obj), indent=indent, sort_keys=True, allow_nan=False)


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def trajectory_jsonl(traj: FlowTrajectory) -> str:
    """One JSON object per state: flow time, action and the coefficients."""
    n = traj.n_modes
    lines = []
    for s, act, c in zip(traj.s_grid, traj.action_values, traj.coeffs):
        record = {"s": s, "action": act, "a0": c[0], "a": c[1 : n + 1], "b": c[n + 1 :]}
        lines.append(dumps(record, indent=None))
    return "\n".join(lines) + "\n"


def trajectory_csv(traj: FlowTrajectory) -> str:
    """Columns ``s, action, amp_0 .. amp_N`` with ``amp_n = sqrt(a_n^2 + b_n^2)``."""
    n = traj.n_modes
    c = traj.coeffs
    amps = np.column_stack((np.abs(c[:, 0]), np.hypot(c[:, 1 : n + 1], c[:, n + 1 :])))
    header = ["s", "action"] + [f"amp_{i}" for i in range(n + 1)]
    rows = (np.concatenate(([s, a], amp)) for s, a, amp in zip(traj.s_grid, traj.action_values, amps))
    return rows_to_csv(header, ([float(x) for x in r] for r in rows))


def write_text(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path
