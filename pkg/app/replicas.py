"""
Seirkit Replica Runner

Runs many independent simulations over a process pool. Replica i always
draws from stream (master_seed, i), so results are identical for any worker
count and any scheduling; chunks come back in submission order.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import partial
from multiprocessing import Pool
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np

from .catalogue import model_catalogue
from .config import get_settings
from .epidemic import EpidemicParams
from .errors import ModelDefinitionError, UnsupportedCombinationError
from .simulation import (
    EpidemicOutcome, Trajectory, markov_outcome, sellke_final_size,
    simulate_markov, simulate_seir_general, simulate_sellke,
)
from .streams import SeedSpec

logger = logging.getLogger(__name__)

Method = Literal["markov", "agent", "sellke"]
_CHUNK = 256


@dataclass(frozen=True)
class ReplicaJob:
    """Everything a worker needs to reproduce replica i on its own.

    The markov method names a catalogue model (rebuilt inside workers) and
    starts from ``initial`` counts at scale ``population``; agent and sellke
    use ``params``.
    """

    method: Method
    replicas: int
    master_seed: int
    params: Optional[EpidemicParams] = None
    model_name: Optional[str] = None
    model_params: Dict[str, float] = field(default_factory=dict)
    population: int = 0
    initial: Tuple[int, ...] = ()
    horizon: float = math.inf
    takeoff_min: Optional[int] = None

    def __post_init__(self):
        if self.replicas < 1:
            raise ModelDefinitionError("replica count must be >= 1")
        if self.method == "markov":
            if self.model_name is None or not self.initial or self.population < 1:
                raise UnsupportedCombinationError("markov jobs need a model, a population and initial counts")
        elif self.method in ("agent", "sellke"):
            if self.params is None:
                raise UnsupportedCombinationError(f"{self.method} jobs need epidemic parameters")
        else:
            raise UnsupportedCombinationError(f"unknown simulation method {self.method!r}")


def simulate_one(job: ReplicaJob, index: int, record: bool = True) -> Tuple[Trajectory, EpidemicOutcome]:
    """Replica ``index`` of ``job``; re-running it reproduces it exactly."""
    seed = SeedSpec(job.master_seed, index)
    if job.method == "markov":
        model = model_catalogue(job.model_name, job.model_params)
        trajectory = simulate_markov(model, job.initial, job.population, job.horizon, seed)
        return trajectory, markov_outcome(model, trajectory, job.population, index, job.takeoff_min)
    if job.method == "agent":
        return simulate_seir_general(job.params, seed, record=record, takeoff_min=job.takeoff_min)
    return simulate_sellke(job.params, seed, record=record, takeoff_min=job.takeoff_min)


def _run_chunk(job: ReplicaJob, indices: range) -> List[EpidemicOutcome]:
    return [simulate_one(job, i, record=False)[1] for i in indices]


def _final_size_chunk(params: EpidemicParams, master_seed: int, indices: range) -> List[Tuple[int, float]]:
    return [sellke_final_size(params, SeedSpec(master_seed, i)) for i in indices]


def _chunks(count: int, size: int = _CHUNK) -> List[range]:
    return [range(start, min(start + size, count)) for start in range(0, count, size)]


def _map(fn, chunks: Sequence[range], parallelism: int) -> list:
    if parallelism <= 1 or len(chunks) == 1:
        results = [fn(chunk) for chunk in chunks]
    else:
        with Pool(processes=min(parallelism, len(chunks))) as pool:
            results = pool.map(fn, chunks)
    return [item for chunk in results for item in chunk]


def run_replicas(job: ReplicaJob, parallelism: Optional[int] = None) -> List[EpidemicOutcome]:
    """Outcomes of replicas 0..job.replicas-1 in replica order."""
    workers = parallelism or get_settings().worker_count
    logger.info("running %d %s replicas (seed %d, %d workers)",
                job.replicas, job.method, job.master_seed, workers)
    outcomes = _map(partial(_run_chunk, job), _chunks(job.replicas), workers)
    logger.info("finished %d %s replicas", len(outcomes), job.method)
    return outcomes


def final_size_sample(
    params: EpidemicParams,
    replicas: int,
    master_seed: int,
    parallelism: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Final sizes and total pressures of many epidemics via the threshold shortcut."""
    if replicas < 1:
        raise ModelDefinitionError("replica count must be >= 1")
    workers = parallelism or get_settings().worker_count
    pairs = _map(partial(_final_size_chunk, params, master_seed), _chunks(replicas, 4 * _CHUNK), workers)
    sizes, pressures = zip(*pairs)
    return np.array(sizes, dtype=np.int64), np.array(pressures)


def _apply(fn: Callable[[int], Any], indices: range) -> list:
    return [fn(i) for i in indices]


def map_replicas(fn: Callable[[int], Any], count: int, parallelism: Optional[int] = None) -> list:
    """[fn(0), ..., fn(count - 1)] over the worker pool; ``fn`` must be picklable."""
    if count < 1:
        raise ModelDefinitionError("replica count must be >= 1")
    workers = parallelism or get_settings().worker_count
    return _map(partial(_apply, fn), _chunks(count), workers)
