"""
Seirkit Validation Suites

Monte Carlo experiments that check the simulators against the analytic
results: the Wald identity, Sellke against agent simulation, simulation
against the exact final-size law, the law of large numbers, the Gaussian
final size, Gaussian fluctuations along the ODE path, the extinction-time
slope and the duration slope.

Each suite returns a SuiteReport; a failed check is a report with
``passed=False``, never an exception.
"""
import logging
import math
from functools import partial
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .branching import growth_rates
from .catalogue import CompartmentalModel, model_catalogue
from .deterministic import OdePath, integrate
from .epidemic import EpidemicParams, basic_reproduction_number
from .errors import ModelDefinitionError, UnsupportedCombinationError
from .final_size import clt_final_size_moments, exact_final_size_distribution, final_size_root
from .fluctuations import ou_variance_along_path
from .large_deviations import sis_endemic_level, sis_quasipotential
from .models import SuiteReport
from .replicas import ReplicaJob, final_size_sample, map_replicas, run_replicas, simulate_one
from .simulation import Trajectory, initial_state, takeoff_threshold, wald_terms_from

logger = logging.getLogger(__name__)

SIGNIFICANCE = 1e-3

SampleMethod = Literal["shortcut", "sellke", "agent"]


def _verdict(report: SuiteReport) -> SuiteReport:
    logger.info("suite %s: %s (seed %d, %d replicas)", report.suite,
                "pass" if report.passed else "FAIL", report.master_seed, report.replicas)
    return report


# =============================================================================
# Test statistics
# =============================================================================

def _merge_bins(expected: np.ndarray, observed: np.ndarray, minimum: float) -> Tuple[np.ndarray, np.ndarray]:
    """Pool adjacent categories until each expected count reaches ``minimum``."""
    exp_out: List[float] = []
    obs_out: List[float] = []
    exp_acc = obs_acc = 0.0
    for e, o in zip(expected, observed):
        exp_acc += e
        obs_acc += o
        if exp_acc >= minimum:
            exp_out.append(exp_acc)
            obs_out.append(obs_acc)
            exp_acc = obs_acc = 0.0
    if exp_acc > 0 or obs_acc > 0:
        if exp_out:
            exp_out[-1] += exp_acc
            obs_out[-1] += obs_acc
        else:
            exp_out.append(exp_acc)
            obs_out.append(obs_acc)
    return np.array(exp_out), np.array(obs_out)


def chi_square_goodness_of_fit(sample: Sequence[int], probs: Sequence[float]) -> Tuple[float, float, int]:
    """(statistic, p-value, degrees of freedom) of an integer sample against a pmf on 0..n."""
    probs = np.asarray(probs, dtype=float)
    sample = np.asarray(sample, dtype=np.int64)
    if sample.size == 0:
        raise ModelDefinitionError("goodness of fit needs a nonempty sample")
    observed = np.bincount(sample, minlength=len(probs))[:len(probs)].astype(float)
    expected = probs / probs.sum() * sample.size
    expected, observed = _merge_bins(expected, observed, 5.0)
    if len(expected) < 2:
        return 0.0, 1.0, 0
    statistic, p_value = stats.chisquare(observed, expected * observed.sum() / expected.sum())
    return float(statistic), float(p_value), len(expected) - 1


def two_sample_chi_square(a: Sequence[int], b: Sequence[int]) -> Tuple[float, float, int]:
    """Homogeneity test of two integer samples, categories pooled to >= 10 pooled counts."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    size = int(max(a.max(initial=0), b.max(initial=0))) + 1
    counts_a = np.bincount(a, minlength=size).astype(float)
    counts_b = np.bincount(b, minlength=size).astype(float)
    pooled, stacked_a = _merge_bins(counts_a + counts_b, counts_a, 10.0)
    if len(pooled) < 2:
        return 0.0, 1.0, 0
    table = np.vstack([stacked_a, pooled - stacked_a])
    statistic, p_value, dof, _ = stats.chi2_contingency(table, correction=False)
    return float(statistic), float(p_value), int(dof)


def first_crossing_time(trajectory: Trajectory, compartment: str, level: float) -> Optional[float]:
    """First event time at which a compartment count reaches ``level``; None if never."""
    column = trajectory.column(compartment)
    hits = np.flatnonzero(column >= level)
    return float(trajectory.times[hits[0]]) if hits.size else None


def sup_distance(trajectory: Trajectory, path: OdePath, N: float, offset: float = 0.0) -> float:
    """max over the path grid of |Z(offset + t) / N - z(t)|."""
    stochastic = trajectory.state_at(offset + path.grid) / float(N)
    return float(np.abs(stochastic - path.values).max())


def final_size_draws(
    params: EpidemicParams,
    replicas: int,
    master_seed: int,
    method: SampleMethod = "shortcut",
    parallelism: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Final sizes and total pressures from the threshold shortcut or a full simulator."""
    if method == "shortcut":
        return final_size_sample(params, replicas, master_seed, parallelism)
    if method not in ("sellke", "agent"):
        raise UnsupportedCombinationError(f"unknown final-size sampler {method!r}")
    outcomes = run_replicas(ReplicaJob(method, replicas, master_seed, params=params), parallelism)
    return (np.array([o.final_size for o in outcomes], dtype=np.int64),
            np.array([o.total_pressure for o in outcomes]))


def major_outbreak_cut(population: int, z_star: float, minimum: Optional[int] = None) -> int:
    """Smallest final size counted as a major outbreak when comparing with the Gaussian law.

    The take-off threshold is raised to half the deterministic final size,
    so minor outbreaks are not mistaken for the lower tail of major ones.
    """
    return max(takeoff_threshold(population, minimum), math.ceil(0.5 * z_star * population))


# =============================================================================
# Suites
# =============================================================================

def wald_suite(
    params: EpidemicParams,
    replicas: int,
    master_seed: int,
    thetas: Sequence[float] = (1.0,),
    parallelism: Optional[int] = None,
    method: SampleMethod = "shortcut",
) -> SuiteReport:
    """Mean of exp(-theta A) / psi_I(-theta lambda/N)^(k + Z) within 4 standard errors of 1."""
    sizes, pressures = final_size_draws(params, replicas, master_seed, method, parallelism)
    statistics: Dict[str, Dict[str, float]] = {}
    passed = True
    for theta in thetas:
        terms = wald_terms_from(sizes, pressures, theta, params)
        mean = float(terms.mean())
        se = float(terms.std(ddof=1) / math.sqrt(terms.size)) if terms.size > 1 else 0.0
        ok = bool(abs(mean - 1.0) <= max(4.0 * se, 1e-12))
        passed &= ok
        statistics[format(theta, "g")] = {"mean": mean, "standard_error": se, "passed": ok}
    return _verdict(SuiteReport(suite="wald", passed=passed, statistics=statistics,
                                master_seed=master_seed, replicas=replicas))


def sellke_vs_agent_suite(
    params: EpidemicParams,
    replicas: int,
    master_seed: int,
    parallelism: Optional[int] = None,
) -> SuiteReport:
    """Two-sample chi-square on final sizes of the two constructions."""
    agent = run_replicas(ReplicaJob("agent", replicas, master_seed, params=params), parallelism)
    sellke = run_replicas(ReplicaJob("sellke", replicas, (master_seed + 1) % 2 ** 64, params=params),
                          parallelism)
    statistic, p_value, dof = two_sample_chi_square(
        [o.final_size for o in agent], [o.final_size for o in sellke])
    return _verdict(SuiteReport(
        suite="sellke-vs-agent", passed=p_value >= SIGNIFICANCE, p_value=p_value,
        statistics={"chi_square": statistic, "dof": dof,
                    "mean_agent": float(np.mean([o.final_size for o in agent])),
                    "mean_sellke": float(np.mean([o.final_size for o in sellke]))},
        master_seed=master_seed, replicas=replicas,
    ))


def mc_vs_exact_suite(
    params: EpidemicParams,
    replicas: int,
    master_seed: int,
    parallelism: Optional[int] = None,
    method: SampleMethod = "shortcut",
) -> SuiteReport:
    """Chi-square goodness of fit of simulated final sizes against the exact law."""
    pmf = exact_final_size_distribution(
        params.population, params.contact_rate, params.infectious,
        initial_infectives=params.initial_infectives)
    sizes, _ = final_size_draws(params, replicas, master_seed, method, parallelism)
    statistic, p_value, dof = chi_square_goodness_of_fit(sizes, pmf.as_array())
    return _verdict(SuiteReport(
        suite="mc-vs-exact", passed=p_value >= SIGNIFICANCE, p_value=p_value,
        statistics={"chi_square": statistic, "dof": dof, "exact_mean": pmf.mean(),
                    "sample_mean": float(sizes.mean()), "method": method},
        master_seed=master_seed, replicas=replicas,
    ))


def _aligned_distance(job: ReplicaJob, level: float, step: Optional[float], index: int) -> Optional[float]:
    trajectory, _ = simulate_one(job, index)
    model = model_catalogue(job.model_name, job.model_params)
    crossing = first_crossing_time(trajectory, model.infectious, level)
    if crossing is None or crossing >= job.horizon:
        return None
    start = trajectory.state_at([crossing])[0] / float(job.population)
    path = integrate(model, start, job.horizon - crossing, step)
    return sup_distance(trajectory, path, job.population, crossing)


def lln_suite(
    model: CompartmentalModel,
    population: int,
    initial: Sequence[int],
    horizon: float,
    init_fraction: float,
    replicas: int,
    master_seed: int,
    tolerance: float = 0.01,
    step: Optional[float] = None,
    parallelism: Optional[int] = None,
) -> SuiteReport:
    """Sup-distance between rescaled jump paths and the ODE.

    Each replica is aligned at the first time its infectives reach
    init_fraction * N; the ODE then starts from the jump state at that time
    and both are compared on [0, horizon - crossing]. Replicas that never
    reach the level are left out. Passes when at least 99% of the rest stay
    within ``tolerance``.
    """
    job = ReplicaJob("markov", replicas, master_seed, model_name=model.name,
                     model_params=dict(model.params), population=population,
                     initial=tuple(int(c) for c in initial), horizon=horizon)
    found = map_replicas(partial(_aligned_distance, job, init_fraction * population, step),
                         replicas, parallelism)
    distances = [d for d in found if d is not None]
    within = sum(d < tolerance for d in distances)
    fraction = within / len(distances) if distances else 0.0
    return _verdict(SuiteReport(
        suite="lln", passed=bool(distances) and fraction >= 0.99,
        statistics={"taken_off": len(distances), "within_tolerance": within,
                    "max_distance": max(distances, default=math.nan), "tolerance": tolerance},
        master_seed=master_seed, replicas=replicas,
    ))


def clt_suite(
    params: EpidemicParams,
    replicas: int,
    master_seed: int,
    parallelism: Optional[int] = None,
    mean_tolerance: float = 0.01,
    sd_tolerance: float = 0.05,
) -> SuiteReport:
    """Sample mean and sd of major-outbreak sizes against the Gaussian prediction.

    Passes when the mean is within ``mean_tolerance`` and the sd within
    ``sd_tolerance`` of the predicted values, relative to them. The
    Kolmogorov-Smirnov p-value of the standardized sizes is reported but does
    not decide the verdict.
    """
    r0 = basic_reproduction_number(params)
    if r0 <= 1:
        raise UnsupportedCombinationError("the Gaussian final-size check needs R0 > 1")
    z_star = final_size_root(r0)
    mean, sd = clt_final_size_moments(params.population, r0, params.infectious.cv2, z_star)
    cut = major_outbreak_cut(params.population, z_star)
    sizes, _ = final_size_sample(params, replicas, master_seed, parallelism)
    major = sizes[sizes >= cut]
    if major.size < 2:
        return _verdict(SuiteReport(suite="clt", passed=False,
                                    statistics={"major_outbreaks": int(major.size), "cut": cut},
                                    master_seed=master_seed, replicas=replicas))
    sample_mean, sample_sd = float(major.mean()), float(major.std(ddof=1))
    mean_error = abs(sample_mean - mean) / mean
    sd_error = abs(sample_sd - sd) / sd
    ks = stats.kstest((major - mean) / sd, "norm")
    return _verdict(SuiteReport(
        suite="clt", passed=bool(mean_error <= mean_tolerance and sd_error <= sd_tolerance),
        p_value=float(ks.pvalue),
        statistics={"ks": float(ks.statistic), "major_outbreaks": int(major.size), "cut": cut,
                    "predicted_mean": mean, "predicted_sd": sd,
                    "sample_mean": sample_mean, "sample_sd": sample_sd,
                    "mean_error": mean_error, "sd_error": sd_error,
                    "mean_tolerance": mean_tolerance, "sd_tolerance": sd_tolerance},
        master_seed=master_seed, replicas=replicas,
    ))


def ldp_slope_suite(
    lam: float,
    gamma: float,
    replicas: int,
    master_seed: int,
    populations: Sequence[int] = (20, 30, 40),
    tolerance: float = 0.25,
    parallelism: Optional[int] = None,
) -> SuiteReport:
    """Slope of log mean SIS extinction time against N, compared with the quasi-potential.

    Runs start at ceil(N x*) infectives.
    """
    x_star = sis_endemic_level(lam, gamma)
    v_bar = sis_quasipotential(lam, gamma).value
    means = []
    for offset, N in enumerate(populations):
        job = ReplicaJob("markov", replicas, (master_seed + offset) % 2 ** 64, model_name="SIS",
                         model_params={"lambda": lam, "gamma": gamma}, population=N,
                         initial=(math.ceil(N * x_star),))
        means.append(float(np.mean([o.extinction_time for o in run_replicas(job, parallelism)])))
    fit = stats.linregress(np.asarray(populations, dtype=float), np.log(means))
    passed = abs(fit.slope - v_bar) <= tolerance * v_bar
    return _verdict(SuiteReport(
        suite="ldp-slope", passed=passed,
        statistics={"slope": float(fit.slope), "V_bar": v_bar, "populations": list(populations),
                    "mean_extinction_times": means, "tolerance": tolerance},
        master_seed=master_seed, replicas=replicas,
    ))


def duration_suite(
    params: EpidemicParams,
    replicas: int,
    master_seed: int,
    populations: Sequence[int] = (1_000, 10_000, 100_000),
    tolerance: float = 0.15,
    parallelism: Optional[int] = None,
) -> SuiteReport:
    """Slope of mean major-outbreak duration against log N, compared with 1/r + 1/|r*|.

    Uses Markov SIR runs with the contact rate and infectious rate of ``params``.
    """
    if params.infectious.kind != "exponential":
        raise UnsupportedCombinationError("the duration check runs Markov SIR and needs an exponential period")
    rates = growth_rates(params)
    predicted = 1.0 / rates.r - 1.0 / rates.r_star
    z_star = final_size_root(basic_reproduction_number(params))
    model_params = {"lambda": params.contact_rate, "gamma": params.infectious.rate}
    sir = model_catalogue("SIR", model_params)
    means = []
    for offset, N in enumerate(populations):
        job = ReplicaJob("markov", replicas, (master_seed + offset) % 2 ** 64, model_name="SIR",
                         model_params=model_params, population=N,
                         initial=tuple(int(c) for c in initial_state(sir, N, params.initial_infectives)))
        cut = major_outbreak_cut(N, z_star)
        durations = [o.extinction_time for o in run_replicas(job, parallelism) if o.final_size >= cut]
        means.append(float(np.mean(durations)) if durations else math.nan)
    fit = stats.linregress(np.log(np.asarray(populations, dtype=float)), means)
    passed = bool(np.isfinite(fit.slope)) and abs(fit.slope - predicted) <= tolerance * predicted
    return _verdict(SuiteReport(
        suite="duration", passed=passed,
        statistics={"slope": float(fit.slope), "predicted": predicted, "r": rates.r,
                    "r_star": rates.r_star, "populations": list(populations),
                    "mean_durations": means, "tolerance": tolerance},
        master_seed=master_seed, replicas=replicas,
    ))


def _scaled_deviation(job: ReplicaJob, times: np.ndarray, expected: np.ndarray, index: int) -> np.ndarray:
    trajectory, _ = simulate_one(job, index)
    N = float(job.population)
    return math.sqrt(N) * (trajectory.state_at(times) / N - expected)


def ou_variance_suite(
    model_name: str,
    model_params: Dict[str, float],
    population: int,
    initial: Sequence[int],
    checkpoints: Sequence[float],
    replicas: int,
    master_seed: int,
    tolerance: float = 0.05,
    step: Optional[float] = None,
    parallelism: Optional[int] = None,
) -> SuiteReport:
    """Variance of sqrt(N) (Z(t)/N - z(t)) for the infectives against the propagated covariance.

    The jump process starts exactly on the ODE initial point, so the
    predicted covariance starts at zero. Passes when the sample variance is
    within ``tolerance`` of the prediction, relative to it, at every checkpoint.
    """
    model = model_catalogue(model_name, model_params)
    if model.infectious is None:
        raise UnsupportedCombinationError(f"{model.name} has no infectious compartment")
    if not checkpoints or min(checkpoints) <= 0:
        raise ModelDefinitionError("checkpoints must be positive times")
    path = integrate(model, np.asarray(initial, dtype=float) / population, max(checkpoints), step)
    covariance = ou_variance_along_path(model, path)
    nodes = [int(np.argmin(np.abs(path.grid - t))) for t in checkpoints]
    times = path.grid[nodes]
    job = ReplicaJob("markov", replicas, master_seed, model_name=model_name,
                     model_params=dict(model_params), population=population,
                     initial=tuple(int(c) for c in initial), horizon=float(times.max()))
    deviations = np.stack(map_replicas(
        partial(_scaled_deviation, job, times, path.values[nodes]), replicas, parallelism))
    k = model.index(model.infectious)
    sample = deviations[:, :, k].var(axis=0, ddof=1)
    statistics: Dict[str, Dict[str, float]] = {}
    passed = True
    for t, n, observed in zip(times, nodes, sample):
        predicted = float(covariance[n, k, k])
        error = abs(float(observed) - predicted) / predicted
        ok = bool(error <= tolerance)
        passed &= ok
        statistics[format(float(t), "g")] = {"predicted": predicted, "sample": float(observed),
                                             "relative_error": error, "passed": ok}
    return _verdict(SuiteReport(suite="ou-variance", passed=passed, statistics=statistics,
                                master_seed=master_seed, replicas=replicas))
