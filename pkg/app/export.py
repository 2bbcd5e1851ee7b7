"""
Seirkit Export

Plot-ready files: CSV with '.' decimals, no thousands separators, UTF-8 and
LF line endings, floats written with 17 significant digits; outcome batches
as JSON lines; reports as JSON.
"""
import csv
import hashlib
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence

import numpy as np

from .deterministic import OdePath
from .final_size import FinalSizePMF
from .simulation import EpidemicOutcome, Trajectory


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def to_jsonable(value: Any) -> Any:
    """Plain JSON types for numpy arrays and scalars, Fractions and mpmath floats."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating, Fraction)) or type(value).__name__ == "mpf":
        number = float(value)
        # JSON has no infinities; keep them readable
        if math.isinf(number):
            return "inf" if number > 0 else "-inf"
        if math.isnan(number):
            return None
        return number
    return value


def _write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def write_trajectory_csv(trajectory: Trajectory, path: Path) -> Path:
    """Columns time, jump_id, then one column per compartment; jump_id is empty on the initial row."""
    header = ["time", "jump_id", *trajectory.compartments]
    jump_ids: List[Any] = [""] + [int(j) for j in trajectory.jump_ids]
    rows = ([float(t), j, *(int(c) for c in state)]
            for t, j, state in zip(trajectory.times, jump_ids, trajectory.states))
    return _write_rows(path, header, rows)


def write_path_csv(ode_path: OdePath, path: Path) -> Path:
    header = ["time", *ode_path.compartments]
    rows = ([float(t), *(float(v) for v in values)] for t, values in zip(ode_path.grid, ode_path.values))
    return _write_rows(path, header, rows)


def write_pmf_csv(pmf: FinalSizePMF, path: Path) -> Path:
    return _write_rows(path, ["k", "probability"],
                       ([k, float(p)] for k, p in enumerate(pmf.probs)))


def write_outcomes_jsonl(
    outcomes: Iterable[EpidemicOutcome],
    path: Path,
    master_seed: Optional[int] = None,
) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for outcome in outcomes:
            record = outcome.to_record()
            if master_seed is not None:
                record["master_seed"] = master_seed
            handle.write(json.dumps(to_jsonable(record), sort_keys=True) + "\n")
    return path


def write_json(payload: Any, path: Path) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        json.dump(to_jsonable(payload), handle, indent=2, sort_keys=True)
        handle.write("\n")
    return path


def covariance_record(V: np.ndarray, compartments: Sequence[str], residual: Optional[float] = None) -> dict:
    record = {"compartments": list(compartments), "covariance": np.asarray(V).tolist()}
    if residual is not None:
        record["residual"] = residual
    return record


def file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
