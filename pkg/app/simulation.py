"""
Seirkit Exact Simulation

Three exact samplers for stochastic epidemics:

- ``simulate_markov``: next-jump (Gillespie) simulation of a catalogued
  density-dependent Markov model.
- ``simulate_seir_general``: event-driven agent simulation of the SEIR
  epidemic with arbitrary latent and infectious period laws.
- ``simulate_sellke``: the threshold construction, where individuals are
  infected in order of their Exp(1) resistances as the cumulative infection
  pressure crosses them.

All three return trajectories in counts (not proportions) and summarise
runs as ``EpidemicOutcome`` records.
"""
import heapq
import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .catalogue import CompartmentalModel
from .config import get_settings
from .epidemic import EpidemicParams
from .errors import EmptyOutcomeError, EventCapExceeded, ModelDefinitionError
from .streams import SeedSpec

logger = logging.getLogger(__name__)

# Compartments and jumps of the agent-based and threshold SEIR simulators.
SEIR_COMPARTMENTS = ("s", "e", "i", "r")
SEIR_JUMPS = np.array([
    [-1, 1, 0, 0],   # infection into the latent state
    [0, -1, 1, 0],   # end of latency
    [0, 0, -1, 1],   # recovery
    [-1, 0, 1, 0],   # infection with zero latency
])
SEIR_JUMP_LABELS = ("infection", "progression", "recovery", "infection_direct")
INFECTION, PROGRESSION, RECOVERY, INFECTION_DIRECT = range(4)

# Event kinds, in tie-breaking order.
_LATENCY_END, _CONTACT, _RECOVERY = 0, 1, 2

_BLOCK = 4096


# =============================================================================
# Records
# =============================================================================

@dataclass
class Trajectory:
    """Event times and the count state after each event.

    ``states[0]`` is the initial state at ``times[0] = 0``; event k moves
    ``states[k]`` to ``states[k + 1]`` by ``jumps[jump_ids[k]]``.

    Times are nondecreasing. Markov paths never tie; agent and Sellke runs
    with constant periods can, and tied events are listed in (time, kind,
    individual) order with kinds latency end, contact, recovery. ``state_at``
    returns the state after all events at a tied time.
    """

    times: np.ndarray
    states: np.ndarray
    jump_ids: np.ndarray
    compartments: Tuple[str, ...]
    jumps: np.ndarray

    @property
    def n_events(self) -> int:
        return len(self.jump_ids)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def column(self, compartment: str) -> np.ndarray:
        return self.states[:, self.compartments.index(compartment)]

    def state_at(self, grid: Sequence[float]) -> np.ndarray:
        """Right-continuous step interpolation of the state on ``grid``."""
        pos = np.searchsorted(self.times, np.asarray(grid, dtype=float), side="right") - 1
        return self.states[np.clip(pos, 0, None)]

    def time_integral(self, compartment: str) -> float:
        """Integral of a compartment count from time 0 to the last event."""
        counts = self.column(compartment)[:-1]
        return float(np.sum(counts * np.diff(self.times)))


@dataclass(frozen=True)
class EpidemicOutcome:
    """Summary of one realization.

    ``final_size`` excludes index cases. ``contacts`` and
    ``first_repeat_contact`` are filled by the agent simulator only; the
    latter is the 1-based number of the first contact landing on an
    individual contacted before (None if all contacts were distinct).
    """

    final_size: int
    total_pressure: float
    extinction_time: float
    peak_infectives: int
    took_off: bool
    replica_index: int = 0
    contacts: int = 0
    first_repeat_contact: Optional[int] = None

    def to_record(self) -> Dict[str, Any]:
        return asdict(self)


def takeoff_threshold(population: int, minimum: Optional[int] = None) -> int:
    """Final sizes at or above max(minimum, ceil(sqrt(N))) count as major outbreaks."""
    if minimum is None:
        minimum = get_settings().takeoff_min
    return max(minimum, math.ceil(math.sqrt(population)))


def _uniforms(rng: np.random.Generator) -> Iterator[Tuple[float, float]]:
    while True:
        for u1, u2 in rng.random((_BLOCK, 2)):
            yield u1, u2


# =============================================================================
# Markov jump processes
# =============================================================================

def initial_state(model: CompartmentalModel, population: int, initial_infectives: int) -> np.ndarray:
    """Counts with everyone susceptible except ``initial_infectives`` infectives."""
    state = np.zeros(model.dimension, dtype=np.int64)
    if model.susceptible is not None:
        state[model.index(model.susceptible)] = population
    if model.infectious is None:
        raise ModelDefinitionError(f"{model.name} has no infectious compartment")
    state[model.index(model.infectious)] = initial_infectives
    return state


def simulate_markov(
    model: CompartmentalModel,
    initial: Sequence[int],
    N: int,
    horizon: float = math.inf,
    seed: SeedSpec = SeedSpec(0),
    event_cap: Optional[int] = None,
) -> Trajectory:
    """Gillespie simulation of ``model`` with count rates N * beta_j(t, Z/N).

    Stops at ``horizon`` or when the total rate vanishes.
    """
    state = np.array(initial, dtype=np.int64)
    if state.shape != (model.dimension,) or np.any(state < 0):
        raise ModelDefinitionError(f"initial state must be {model.dimension} nonnegative counts")
    if event_cap is None:
        settings = get_settings()
        if model.conserved:
            event_cap = settings.event_cap_factor * max(N, int(state.sum()))
        else:
            event_cap = settings.max_events

    rng = seed.generator()
    draws = _uniforms(rng)
    scale = float(N)
    t = 0.0
    times: List[float] = [0.0]
    states: List[np.ndarray] = [state.copy()]
    jump_ids: List[int] = []

    while True:
        rates = scale * model.rates(t, state / scale)
        if np.any(rates < 0) or not np.all(np.isfinite(rates)):
            raise ModelDefinitionError(f"{model.name}: invalid rates {rates} at state {state}")
        total = rates.sum()
        if total <= 0:
            break
        u1, u2 = next(draws)
        t += -math.log1p(-u1) / total
        if t > horizon:
            break
        j = min(int(np.searchsorted(np.cumsum(rates), u2 * total, side="right")), model.n_jumps - 1)
        state = state + model.jumps[j]
        if np.any(state < 0):
            raise ModelDefinitionError(f"{model.name}: jump {j} produced negative counts")
        times.append(t)
        states.append(state)
        jump_ids.append(j)
        if len(jump_ids) > event_cap:
            logger.error("%s: event cap %d exceeded (seed %s)", model.name, event_cap, seed)
            raise EventCapExceeded(f"{model.name}: more than {event_cap} events in one run")

    return Trajectory(
        times=np.array(times), states=np.array(states),
        jump_ids=np.array(jump_ids, dtype=np.int64),
        compartments=model.compartments, jumps=model.jumps,
    )


def markov_outcome(
    model: CompartmentalModel,
    trajectory: Trajectory,
    N: int,
    replica_index: int = 0,
    takeoff_min: Optional[int] = None,
) -> EpidemicOutcome:
    """Outcome of a Markov run: infections counted from the jumps labelled ``infection``."""
    infection_jumps = [j for j, label in enumerate(model.jump_labels) if label == "infection"]
    final_size = int(np.isin(trajectory.jump_ids, infection_jumps).sum())
    infectives = trajectory.column(model.infectious)
    pressure = model.params.get("lambda", 0.0) / N * trajectory.time_integral(model.infectious)
    return EpidemicOutcome(
        final_size=final_size,
        total_pressure=pressure,
        extinction_time=float(trajectory.times[-1]),
        peak_infectives=int(infectives.max()),
        took_off=final_size >= takeoff_threshold(N, takeoff_min),
        replica_index=replica_index,
    )


# =============================================================================
# Agent-based SEIR
# =============================================================================

class _Recorder:
    """Accumulates SEIR count states as events fire."""

    def __init__(self, counts: List[int], record: bool):
        self.counts = counts
        self.record = record
        self.times: List[float] = [0.0]
        self.states: List[Tuple[int, ...]] = [tuple(counts)]
        self.jump_ids: List[int] = []
        self.last_time = 0.0
        self.peak = counts[2]

    def fire(self, t: float, jump: int) -> None:
        for k, step in enumerate(SEIR_JUMPS[jump]):
            self.counts[k] += int(step)
        self.last_time = t
        self.peak = max(self.peak, self.counts[2])
        if self.record:
            self.times.append(t)
            self.states.append(tuple(self.counts))
            self.jump_ids.append(jump)

    def trajectory(self) -> Trajectory:
        return Trajectory(
            times=np.array(self.times), states=np.array(self.states, dtype=np.int64),
            jump_ids=np.array(self.jump_ids, dtype=np.int64),
            compartments=SEIR_COMPARTMENTS, jumps=SEIR_JUMPS,
        )


def simulate_seir_general(
    params: EpidemicParams,
    seed: SeedSpec,
    record: bool = True,
    takeoff_min: Optional[int] = None,
) -> Tuple[Trajectory, EpidemicOutcome]:
    """Event-driven SEIR epidemic with the given period laws.

    Susceptibles are labelled 0..N-1 and index cases N..N+k-1; index cases
    start infectious at time 0 and cannot be contacted. Each infective makes
    contacts at rate lambda during its infectious period, each with an
    individual chosen uniformly among the N; contacts with non-susceptibles
    have no effect.
    """
    rng = seed.generator()
    N, lam = params.population, params.contact_rate
    susceptible = np.ones(N, dtype=bool)
    contacted = np.zeros(N, dtype=bool)
    ends: Dict[int, float] = {}
    events: List[Tuple[float, int, int]] = []
    rec = _Recorder([N, 0, params.initial_infectives, 0], record)
    periods_total = 0.0
    contacts = 0
    first_repeat: Optional[int] = None

    def start_infectious(t: float, who: int) -> None:
        nonlocal periods_total
        duration = float(params.infectious.sample(rng))
        periods_total += duration
        ends[who] = t + duration
        heapq.heappush(events, (t + duration, _RECOVERY, who))
        schedule_contact(t, who)

    def schedule_contact(t: float, who: int) -> None:
        nxt = t + rng.exponential(1.0 / lam)
        if nxt < ends[who]:
            heapq.heappush(events, (nxt, _CONTACT, who))

    for k in range(params.initial_infectives):
        start_infectious(0.0, N + k)

    while events:
        t, kind, who = heapq.heappop(events)
        if kind == _CONTACT:
            target = int(rng.integers(N))
            contacts += 1
            if contacted[target] and first_repeat is None:
                first_repeat = contacts
            contacted[target] = True
            if susceptible[target]:
                susceptible[target] = False
                latency = float(params.latent.sample(rng))
                if latency > 0:
                    rec.fire(t, INFECTION)
                    heapq.heappush(events, (t + latency, _LATENCY_END, target))
                else:
                    rec.fire(t, INFECTION_DIRECT)
                    start_infectious(t, target)
            schedule_contact(t, who)
        elif kind == _LATENCY_END:
            rec.fire(t, PROGRESSION)
            start_infectious(t, who)
        else:
            rec.fire(t, RECOVERY)

    final_size = N - rec.counts[0]
    outcome = EpidemicOutcome(
        final_size=final_size,
        total_pressure=params.pair_rate * periods_total,
        extinction_time=rec.last_time,
        peak_infectives=rec.peak,
        took_off=final_size >= takeoff_threshold(N, takeoff_min),
        replica_index=seed.replica_index,
        contacts=contacts,
        first_repeat_contact=first_repeat,
    )
    return rec.trajectory(), outcome


# =============================================================================
# Sellke construction
# =============================================================================

def simulate_sellke(
    params: EpidemicParams,
    seed: SeedSpec,
    record: bool = True,
    takeoff_min: Optional[int] = None,
) -> Tuple[Trajectory, EpidemicOutcome]:
    """Threshold construction of the SEIR epidemic.

    The cumulative pressure (lambda/N) * integral of I(s) ds grows linearly
    between events; the susceptible with the next smallest threshold is
    infected the moment the pressure reaches it.
    """
    rng = seed.generator()
    N, k0 = params.population, params.initial_infectives
    thresholds = np.sort(rng.exponential(1.0, N))
    latents = params.latent.sample(rng, N)
    infectious = params.infectious.sample(rng, N + k0)
    beta = params.pair_rate

    rec = _Recorder([N, 0, k0, 0], record)
    events: List[Tuple[float, int, int]] = []
    for k in range(k0):
        heapq.heappush(events, (float(infectious[k]), _RECOVERY, N + k))
    t = 0.0
    pressure = 0.0
    victim = 0

    while True:
        i_now = rec.counts[2]
        if i_now > 0 and victim < N:
            t_cross = t + max(0.0, thresholds[victim] - pressure) / (beta * i_now)
        else:
            t_cross = math.inf
        if not events and t_cross == math.inf:
            break
        if events and (events[0][0], events[0][1]) <= (t_cross, _CONTACT):
            t_event, kind, who = heapq.heappop(events)
            pressure += beta * i_now * (t_event - t)
            t = t_event
            if kind == _LATENCY_END:
                rec.fire(t, PROGRESSION)
                heapq.heappush(events, (t + float(infectious[k0 + who]), _RECOVERY, who))
            else:
                rec.fire(t, RECOVERY)
            continue
        pressure = max(pressure, float(thresholds[victim]))
        t = t_cross
        latency = float(latents[victim])
        if latency > 0:
            rec.fire(t, INFECTION)
            heapq.heappush(events, (t + latency, _LATENCY_END, victim))
        else:
            rec.fire(t, INFECTION_DIRECT)
            heapq.heappush(events, (t + float(infectious[k0 + victim]), _RECOVERY, victim))
        victim += 1

    outcome = EpidemicOutcome(
        final_size=victim,
        total_pressure=pressure,
        extinction_time=rec.last_time,
        peak_infectives=rec.peak,
        took_off=victim >= takeoff_threshold(N, takeoff_min),
        replica_index=seed.replica_index,
    )
    return rec.trajectory(), outcome


def sellke_final_size(params: EpidemicParams, seed: SeedSpec) -> Tuple[int, float]:
    """Final size and total pressure from thresholds and infectious periods alone.

    Z = min{k : Q_(k+1) > (lambda/N) * sum of the first k0 + k infectious periods},
    with the ordered thresholds drawn as cumulative exponential spacings.
    """
    rng = seed.generator()
    N, k0 = params.population, params.initial_infectives
    thresholds = np.cumsum(rng.exponential(1.0, N) / np.arange(N, 0, -1))
    pressure = params.pair_rate * np.cumsum(params.infectious.sample(rng, N + k0))
    escaped = thresholds > pressure[k0 - 1:k0 - 1 + N]
    final_size = int(np.argmax(escaped)) if escaped.any() else N
    return final_size, float(pressure[k0 - 1 + final_size])


# =============================================================================
# Wald identity
# =============================================================================

def wald_terms(outcomes: Sequence[EpidemicOutcome], theta: float, params: EpidemicParams) -> np.ndarray:
    """Per-run values exp(-theta A) / psi_I(-theta lambda/N)^(k + Z)."""
    sizes = np.array([o.final_size for o in outcomes], dtype=float)
    pressures = np.array([o.total_pressure for o in outcomes], dtype=float)
    return wald_terms_from(sizes, pressures, theta, params)


def wald_terms_from(sizes, pressures, theta: float, params: EpidemicParams) -> np.ndarray:
    sizes = np.asarray(sizes, dtype=float)
    pressures = np.asarray(pressures, dtype=float)
    if sizes.size == 0:
        raise EmptyOutcomeError("Wald statistic needs at least one outcome")
    if theta < 0:
        raise ModelDefinitionError(f"theta must be >= 0, got {theta}")
    log_psi = math.log(params.infectious.mgf(-theta * params.pair_rate))
    return np.exp(-theta * pressures - (params.initial_infectives + sizes) * log_psi)


def wald_statistic(outcomes: Sequence[EpidemicOutcome], theta: float, params: EpidemicParams) -> float:
    """Monte Carlo mean of the Wald martingale; 1 in expectation for every theta >= 0."""
    return float(wald_terms(outcomes, theta, params).mean())
