import csv
import io
import json

import numpy as np

from freefall.heatflow import SolverConfig, shoot_unstable
from freefall.serialize import dumps, rows_to_csv, to_plain, trajectory_csv, trajectory_jsonl


def test_to_plain_and_exact_floats():
    x = 0.1 + 0.2
    data = {1: np.float64(x), "v": np.arange(3), "flag": np.bool_(True), "bad": float("nan")}
    plain = to_plain(data)
    assert plain == {"1": x, "v": [0, 1, 2], "flag": True, "bad": None}
    assert json.loads(dumps(data))["1"] == x


def test_dumps_is_deterministic():
    assert dumps({"b": 1, "a": 2}) == dumps({"a": 2, "b": 1})


def test_rows_to_csv():
    text = rows_to_csv(["x", "label"], [(1.5, "a"), (np.float64(1 / 3), "b")])
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["x", "label"]
    assert float(rows[2][0]) == 1 / 3


def test_trajectory_outputs():
    traj = shoot_unstable(1, 0.5, SolverConfig(n_modes=4)).decimated(50)
    lines = trajectory_jsonl(traj).splitlines()
    assert len(lines) == len(traj)
    first = json.loads(lines[0])
    assert np.array_equal([first["a0"], *first["a"], *first["b"]], traj.coeffs[0])
    rows = list(csv.reader(io.StringIO(trajectory_csv(traj))))
    assert rows[0][:3] == ["s", "action", "amp_0"] and len(rows[0]) == 2 + 5
    assert len(rows) == len(traj) + 1
