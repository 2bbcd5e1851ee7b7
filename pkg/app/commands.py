"""
Seirkit Commands

analyze, simulate and validate on a ModelDocument. The CLI and the HTTP
routers both call these; neither does numerics of its own.
"""
import logging
import math
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np

from .branching import (
    OffspringLaw, duration_leading_terms, extinction_probability, growth_rates, takeoff_probability,
)
from .catalogue import sir_demography_thresholds
from .config import get_settings
from .deterministic import critical_community_size, endemic_equilibrium, ross_malaria_equilibrium
from .epidemic import (
    basic_reproduction_number, critical_vaccination_coverage, escape_probability,
    vaccinated_reproduction_number,
)
from .errors import EmptyOutcomeError, ModelDefinitionError, UnsupportedCombinationError
from .export import covariance_record
from .final_size import (
    chain_binomial_distribution, exact_final_size_distribution, final_size_root,
    final_size_with_policy, outbreak_asymptotics, subcritical_check,
)
from .fluctuations import linearize, lyapunov_solve, nasell_covariance
from .large_deviations import extinction_time_scale, sis_endemic_level, sis_quasipotential
from .models import ModelDocument, SimulationSummary, SuiteReport
from .replicas import Method, ReplicaJob, run_replicas
from .simulation import EpidemicOutcome, initial_state
from . import validation

logger = logging.getLogger(__name__)

_SEIR_FAMILY = ("SIR", "SEIR")
_DEMOGRAPHY = ("SIR-demography",)


# =============================================================================
# analyze
# =============================================================================

def document_r0(doc: ModelDocument) -> float:
    """R0 of the document's model."""
    p = doc.params
    if doc.model in _DEMOGRAPHY:
        return sir_demography_thresholds(p)[0]
    if doc.model in ("SEIRS-demography", "SEIRS-constant"):
        mu = p["mu"]
        return p["lambda"] * p["nu"] / ((p["nu"] + mu) * (p["gamma"] + mu))
    if doc.model == "Ross-malaria":
        return math.sqrt(p["a"] ** 2 * p["p_vh"] * p["p_hv"] * p["m"] / (p["gamma"] * p["mu"]))
    return basic_reproduction_number(doc.epidemic_params())


def _needs(doc: ModelDocument, models: Tuple[str, ...], what: str) -> None:
    if doc.model not in models:
        raise UnsupportedCombinationError(f"{what} is defined for {', '.join(models)}, not {doc.model}")


def _r0(doc, report):
    report["r0"] = document_r0(doc)
    return "R0"


def _escape(doc, report):
    report["escape"] = escape_probability(doc.epidemic_params())
    return "psi_I(-lambda/N)"


def _extinction(doc, report):
    params = doc.epidemic_params()
    q = extinction_probability(OffspringLaw.from_params(params))
    report["extinction"] = q
    report["minor_outbreak"] = q ** params.initial_infectives
    return "smallest root of g(q) = q"


def _takeoff(doc, report):
    report["takeoff"] = takeoff_probability(doc.epidemic_params(), doc.vaccination_policy())
    return "1 - q^k"


def _malthus(doc, report):
    rates = growth_rates(doc.epidemic_params())
    report["malthus"] = {"r": rates.r, "r_star": rates.r_star}
    return "Malthusian equation"


def _duration(doc, report):
    params = doc.epidemic_params()
    rates = growth_rates(params)
    growth, decline = duration_leading_terms(params.population, rates)
    report["duration"] = {"growth_phase": growth, "end_phase": decline, "total": growth + decline,
                          "slope_in_log_n": 1.0 / rates.r - 1.0 / rates.r_star}
    return "log N / r - log N / r_star"


def _final_size(doc, report):
    r0 = document_r0(doc)
    z_star = final_size_root(r0)
    report["final_size"] = {"z_star": z_star}
    if r0 > 1:
        report["final_size"]["residual_reproduction"] = subcritical_check(r0, z_star)
    return "1 - z = exp(-R0 z)"


def _asymptotics(doc, report):
    a = outbreak_asymptotics(doc.epidemic_params())
    report["asymptotics"] = {"z_star": a.z_star, "minor_prob": a.minor_prob,
                             "clt_mean": a.clt_mean, "clt_sd": a.clt_sd}
    return "Gaussian final size of major outbreaks"


def _vaccination(doc, report):
    r0 = document_r0(doc)
    out: Dict[str, Any] = {"critical_coverage": critical_vaccination_coverage(r0)}
    policy = doc.vaccination_policy()
    if policy is not None:
        out["r_v"] = vaccinated_reproduction_number(r0, policy)
        sizes = final_size_with_policy(r0, policy)
        out.update(unvaccinated=sizes.unvaccinated, vaccinated=sizes.vaccinated, community=sizes.community)
    report["vaccination"] = out
    return "v_c = 1 - 1/R0"


def _exact_pmf(doc, report):
    params = doc.epidemic_params()
    pmf = exact_final_size_distribution(params.population, params.contact_rate, params.infectious,
                                        initial_infectives=params.initial_infectives)
    report["exact_pmf"] = pmf.describe()
    return "triangular final-size recursion"


def _chain_binomial(doc, report):
    params = doc.epidemic_params()
    pmf = chain_binomial_distribution(params.population, 1.0 - escape_probability(params),
                                      params.initial_infectives)
    report["chain_binomial"] = pmf.describe()
    return "Reed-Frost chains"


def _endemic(doc, report):
    p = doc.params
    if doc.model in _DEMOGRAPHY:
        state = endemic_equilibrium(*sir_demography_thresholds(p))
        report["endemic"] = {"s_hat": state.s_hat, "i_hat": state.i_hat, "r_hat": state.r_hat}
    elif doc.model == "SIS":
        report["endemic"] = {"i_hat": sis_endemic_level(p["lambda"], p["gamma"])}
    elif doc.model == "Ross-malaria":
        h, v = ross_malaria_equilibrium(p["a"], p["p_vh"], p["p_hv"], p["m"], p["gamma"], p["mu"])
        report["endemic"] = {"h_hat": h, "v_hat": v}
    else:
        raise UnsupportedCombinationError(f"no endemic state formula for {doc.model}")
    return "endemic equilibrium"


def _ncrit(doc, report):
    _needs(doc, _DEMOGRAPHY, "the critical community size")
    r0, eps = sir_demography_thresholds(doc.params)
    coverage = doc.vaccination.coverage if doc.vaccination else 0.0
    report["ncrit"] = critical_community_size(r0, eps, coverage)
    return "9 / (eps^2 (1 - 1/R0)^2 R0)"


def _covariance(doc, report):
    model = doc.catalogue_model()
    p = doc.params
    if doc.model in _DEMOGRAPHY:
        r0, eps = sir_demography_thresholds(p)
        state = endemic_equilibrium(r0, eps)
        point = [state.s_hat, state.i_hat]
        closed = nasell_covariance(r0, eps).tolist()
    elif doc.model == "SIS":
        point = [sis_endemic_level(p["lambda"], p["gamma"])]
        closed = None
    else:
        raise UnsupportedCombinationError(f"stationary covariance is available for SIR-demography and SIS, not {doc.model}")
    system = linearize(model, point)
    stationary = lyapunov_solve(system.A, system.C)
    report["covariance"] = {**covariance_record(stationary.V, model.compartments, stationary.residual),
                            "point": point}
    if closed is not None:
        report["covariance"]["closed_form"] = closed
    return "A V + V A^T + C C^T = 0"


def _quasipotential(doc, report):
    _needs(doc, ("SIS",), "the closed-form quasi-potential")
    lam, gamma = doc.params["lambda"], doc.params["gamma"]
    qp = sis_quasipotential(lam, gamma)
    scale = extinction_time_scale(doc.population, qp)
    report["quasipotential"] = {
        **qp.report([doc.population]),
        "quadrature": sis_quasipotential(lam, gamma, method="quadrature").value,
        "extinction_time": {"lower": scale.lower, "upper": scale.upper,
                            "central": scale.central, "slack": scale.slack},
    }
    return "log R0 - 1 + 1/R0"


ANALYZERS: Dict[str, Callable[[ModelDocument, Dict[str, Any]], str]] = {
    "r0": _r0,
    "escape": _escape,
    "extinction": _extinction,
    "takeoff": _takeoff,
    "malthus": _malthus,
    "duration": _duration,
    "final-size": _final_size,
    "asymptotics": _asymptotics,
    "vaccination": _vaccination,
    "exact-pmf": _exact_pmf,
    "chain-binomial": _chain_binomial,
    "endemic": _endemic,
    "ncrit": _ncrit,
    "covariance": _covariance,
    "quasipotential": _quasipotential,
}


def analyze(doc: ModelDocument, which: Iterable[str]) -> Dict[str, Any]:
    """One JSON object with each requested quantity and the name of its formula."""
    report: Dict[str, Any] = {"model": doc.model}
    formulas: Dict[str, str] = {}
    for key in which:
        if key not in ANALYZERS:
            raise UnsupportedCombinationError(f"unknown quantity {key!r}; known: {', '.join(ANALYZERS)}")
        formulas[key] = ANALYZERS[key](doc, report)
    report["formulas"] = formulas
    return report


# =============================================================================
# simulate
# =============================================================================

def replica_job(doc: ModelDocument, method: Method, replicas: int, seed: int,
                horizon: Optional[float] = None) -> ReplicaJob:
    """Check the method fits the document and build the job."""
    if method == "markov":
        if (doc.latent is not None and doc.latent.kind != "exponential") or \
                (doc.infectious is not None and doc.infectious.kind != "exponential"):
            raise UnsupportedCombinationError("markov simulation needs exponential periods")
        for spec, key in ((doc.latent, "nu"), (doc.infectious, "gamma")):
            if spec is not None and key in doc.params and not math.isclose(spec.rate, doc.params[key]):
                raise ModelDefinitionError(
                    f"markov simulation runs at {key}={doc.params[key]:g} but the document also gives "
                    f"an exponential period with rate {spec.rate:g}")
        model = doc.catalogue_model()
        return ReplicaJob(
            "markov", replicas, seed, model_name=doc.model, model_params=dict(doc.params),
            population=doc.population,
            initial=tuple(int(c) for c in initial_state(model, doc.population, doc.initial_infectives)),
            horizon=horizon if horizon is not None else math.inf,
        )
    if doc.model not in _SEIR_FAMILY:
        raise UnsupportedCombinationError(f"{method} simulation covers {', '.join(_SEIR_FAMILY)}, not {doc.model}")
    if horizon is not None:
        raise UnsupportedCombinationError(f"{method} simulation always runs to extinction; drop the horizon")
    return ReplicaJob(method, replicas, seed, params=doc.epidemic_params())


def summarize(outcomes: List[EpidemicOutcome], method: str, seed: int) -> SimulationSummary:
    if not outcomes:
        raise EmptyOutcomeError("nothing to summarize")
    sizes = np.array([o.final_size for o in outcomes], dtype=float)
    return SimulationSummary(
        method=method,
        replicas=len(outcomes),
        master_seed=seed,
        mean_final_size=float(sizes.mean()),
        sd_final_size=float(sizes.std(ddof=1)) if len(sizes) > 1 else 0.0,
        takeoff_fraction=float(np.mean([o.took_off for o in outcomes])),
        mean_extinction_time=float(np.mean([o.extinction_time for o in outcomes])),
    )


def simulate(doc: ModelDocument, method: Method, replicas: int, seed: int,
             horizon: Optional[float] = None, parallelism: Optional[int] = None
             ) -> Tuple[ReplicaJob, List[EpidemicOutcome], SimulationSummary]:
    job = replica_job(doc, method, replicas, seed, horizon)
    outcomes = run_replicas(job, parallelism)
    return job, outcomes, summarize(outcomes, method, seed)


# =============================================================================
# validate
# =============================================================================

def validate(
    doc: ModelDocument,
    suite: str,
    replicas: int,
    seed: int,
    theta: float = 1.0,
    horizon: Optional[float] = None,
    init_fraction: Optional[float] = None,
    parallelism: Optional[int] = None,
    sampler: validation.SampleMethod = "shortcut",
) -> SuiteReport:
    if suite == "wald":
        return validation.wald_suite(doc.epidemic_params(), replicas, seed, (theta,), parallelism, sampler)
    if suite == "sellke-vs-agent":
        return validation.sellke_vs_agent_suite(doc.epidemic_params(), replicas, seed, parallelism)
    if suite == "mc-vs-exact":
        return validation.mc_vs_exact_suite(doc.epidemic_params(), replicas, seed, parallelism, sampler)
    if suite == "clt":
        return validation.clt_suite(doc.epidemic_params(), replicas, seed, parallelism)
    if suite == "duration":
        return validation.duration_suite(doc.epidemic_params(), replicas, seed, parallelism=parallelism)
    if suite == "ldp-slope":
        _needs(doc, ("SIS",), "the extinction-time slope")
        return validation.ldp_slope_suite(doc.params["lambda"], doc.params["gamma"], replicas, seed,
                                          parallelism=parallelism)
    if suite == "lln":
        if horizon is None:
            raise UnsupportedCombinationError("the lln suite needs a horizon")
        model = doc.catalogue_model()
        initial = initial_state(model, doc.population, doc.initial_infectives)
        return validation.lln_suite(
            model, doc.population, initial, horizon,
            init_fraction or get_settings().default_init_fraction, replicas, seed,
            parallelism=parallelism)
    if suite == "ou-variance":
        if horizon is None:
            raise UnsupportedCombinationError("the ou-variance suite needs a horizon")
        model = doc.catalogue_model()
        initial = initial_state(model, doc.population, doc.initial_infectives)
        return validation.ou_variance_suite(
            doc.model, dict(doc.params), doc.population, initial, (horizon / 2, horizon),
            replicas, seed, parallelism=parallelism)
    raise UnsupportedCombinationError(f"unknown suite {suite!r}")

