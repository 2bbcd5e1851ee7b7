import hashlib
import json
import math
from fractions import Fraction

import numpy as np

from app.export import (
    covariance_record, file_digest, format_float, to_jsonable, write_json, write_outcomes_jsonl,
    write_pmf_csv, write_trajectory_csv,
)
from app.final_size import FinalSizePMF
from app.simulation import EpidemicOutcome, Trajectory


def test_floats_keep_seventeen_digits():
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(0.5) == "0.5"
    assert float(format_float(1 / 3)) == 1 / 3


def test_to_jsonable():
    payload = {
        "inf": np.float64(math.inf),
        "nan": math.nan,
        "fraction": Fraction(1, 4),
        "count": np.int64(3),
        "flag": np.bool_(True),
        "array": np.array([1.5, 2.5]),
        3: "key",
    }
    assert to_jsonable(payload) == {
        "inf": "inf", "nan": None, "fraction": 0.25, "count": 3, "flag": True,
        "array": [1.5, 2.5], "3": "key",
    }


def test_trajectory_csv(tmp_path):
    trajectory = Trajectory(
        times=np.array([0.0, 0.5]),
        states=np.array([[2, 1, 0], [1, 2, 0]]),
        jump_ids=np.array([0]),
        compartments=("s", "i", "r"),
        jumps=np.array([[-1, 1, 0], [0, -1, 1]]),
    )
    path = write_trajectory_csv(trajectory, tmp_path / "trajectory.csv")
    assert path.read_bytes() == b"time,jump_id,s,i,r\n0,,2,1,0\n0.5,0,1,2,0\n"


def test_pmf_csv(tmp_path):
    pmf = FinalSizePMF(n=2, probs=(Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)), precision="high")
    path = write_pmf_csv(pmf, tmp_path / "pmf.csv")
    assert path.read_text(encoding="utf-8") == "k,probability\n0,0.25\n1,0.5\n2,0.25\n"


def test_outcomes_jsonl(tmp_path):
    outcomes = [EpidemicOutcome(3, 0.4, 2.5, 2, False, replica_index=i) for i in range(2)]
    path = write_outcomes_jsonl(outcomes, tmp_path / "outcomes.jsonl", master_seed=9)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 2
    records = [json.loads(line) for line in lines]
    assert [r["replica_index"] for r in records] == [0, 1]
    assert all(r["master_seed"] == 9 and r["first_repeat_contact"] is None for r in records)


def test_json_and_digest(tmp_path):
    path = write_json({"b": 1, "a": [np.float64(0.5)]}, tmp_path / "report.json")
    text = path.read_text(encoding="utf-8")
    assert text.index('"a"') < text.index('"b"')
    assert text.endswith("\n")
    assert file_digest(path) == hashlib.sha256(path.read_bytes()).hexdigest()


def test_covariance_record():
    record = covariance_record(np.eye(2), ("s", "i"), residual=0.0)
    assert record == {"compartments": ["s", "i"], "covariance": [[1.0, 0.0], [0.0, 1.0]], "residual": 0.0}
