"""
Seirkit Model Catalogue

Density-dependent jump processes: jump directions h_j and rate functions
beta_j(t, z) on the rescaled state space, with count rates N * beta_j(t, Z/N).
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Optional, Tuple

import numpy as np

from .errors import ModelDefinitionError

RateFn = Callable[[float, np.ndarray], np.ndarray]
GradientFn = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class CompartmentalModel:
    """Jump directions and rates of a density-dependent Markov population model.

    ``conserved`` marks models where every jump preserves the total mass.
    ``reduced`` marks models where an untracked compartment holds 1 - sum(z).
    """

    name: str
    compartments: Tuple[str, ...]
    jumps: np.ndarray
    rate_fn: RateFn
    params: Mapping[str, float] = field(default_factory=dict)
    jump_labels: Tuple[str, ...] = ()
    gradient_fn: Optional[GradientFn] = None
    conserved: bool = False
    reduced: bool = False
    upper: Optional[Tuple[float, ...]] = None
    susceptible: Optional[str] = None
    infectious: Optional[str] = None

    def __post_init__(self):
        jumps = np.atleast_2d(np.asarray(self.jumps, dtype=np.int64))
        object.__setattr__(self, "jumps", jumps)
        if jumps.shape[1] != len(self.compartments):
            raise ModelDefinitionError(
                f"{self.name}: jumps have {jumps.shape[1]} entries, "
                f"model has {len(self.compartments)} compartments"
            )
        if self.jump_labels and len(self.jump_labels) != jumps.shape[0]:
            raise ModelDefinitionError(f"{self.name}: one label per jump required")
        interior = np.full(self.dimension, 1.0 / (self.dimension + 1))
        if np.shape(self.rate_fn(0.0, interior)) != (self.n_jumps,):
            raise ModelDefinitionError(
                f"{self.name}: number of rates does not match number of jumps"
            )

    @property
    def dimension(self) -> int:
        return self.jumps.shape[1]

    @property
    def n_jumps(self) -> int:
        return self.jumps.shape[0]

    def index(self, compartment: str) -> int:
        try:
            return self.compartments.index(compartment)
        except ValueError:
            raise ModelDefinitionError(f"{self.name} has no compartment {compartment!r}")

    def rates(self, t: float, z: np.ndarray) -> np.ndarray:
        return np.asarray(self.rate_fn(t, np.asarray(z, dtype=float)), dtype=float)

    def drift(self, t: float, z: np.ndarray) -> np.ndarray:
        """b(t, z) = sum_j h_j beta_j(t, z)."""
        return self.jumps.T @ self.rates(t, z)

    def jacobian(self, t: float, z: np.ndarray) -> np.ndarray:
        """Jacobian of the drift: analytic for catalogued models, central differences otherwise."""
        z = np.asarray(z, dtype=float)
        if self.gradient_fn is not None:
            return self.jumps.T @ np.asarray(self.gradient_fn(t, z), dtype=float)
        jac = np.empty((self.dimension, self.dimension))
        for k in range(self.dimension):
            h = 1e-6 * (1.0 + abs(z[k]))
            up, down = z.copy(), z.copy()
            up[k] += h
            down[k] -= h
            jac[:, k] = (self.drift(t, up) - self.drift(t, down)) / (2.0 * h)
        return jac

    def in_region(self, z: np.ndarray, tol: float = 1e-9) -> bool:
        z = np.asarray(z, dtype=float)
        if np.any(z < -tol) or not np.all(np.isfinite(z)):
            return False
        if self.upper is not None and np.any(z > np.asarray(self.upper) + tol):
            return False
        if self.reduced and z.sum() > 1.0 + tol:
            return False
        return True


# =============================================================================
# Catalogue
# =============================================================================

_CATALOGUE: Dict[str, Tuple[Tuple[str, ...], Callable[[Dict[str, float]], CompartmentalModel]]] = {}


def _entry(name: str, *required: str):
    def register(builder):
        _CATALOGUE[name] = (required, builder)
        return builder
    return register


def catalogue_names() -> Tuple[str, ...]:
    return tuple(_CATALOGUE)


def required_parameters(name: str) -> Tuple[str, ...]:
    if name not in _CATALOGUE:
        raise ModelDefinitionError(f"unknown model {name!r}; known: {', '.join(_CATALOGUE)}")
    return _CATALOGUE[name][0]


def model_catalogue(name: str, params: Mapping[str, float]) -> CompartmentalModel:
    """Build the catalogued model ``name`` from its rate parameters."""
    required = required_parameters(name)
    missing = [p for p in required if p not in params]
    if missing:
        raise ModelDefinitionError(f"{name} needs parameters: {', '.join(missing)}")
    unknown = sorted(set(params) - set(required))
    if unknown:
        raise ModelDefinitionError(f"{name} does not take parameters: {', '.join(unknown)}")
    values = {}
    for p in required:
        value = float(params[p])
        if not math.isfinite(value) or value < 0:
            raise ModelDefinitionError(f"{name}: parameter {p} must be finite and >= 0, got {value}")
        values[p] = value
    return _CATALOGUE[name][1](values)


@_entry("SIR", "lambda", "gamma")
def _sir(p):
    lam, gamma = p["lambda"], p["gamma"]

    def rates(t, z):
        s, i = z[0], z[1]
        return np.array([lam * s * i, gamma * i])

    def gradient(t, z):
        s, i = z[0], z[1]
        return np.array([[lam * i, lam * s, 0.0],
                         [0.0, gamma, 0.0]])

    return CompartmentalModel(
        name="SIR", compartments=("s", "i", "r"),
        jumps=np.array([[-1, 1, 0], [0, -1, 1]]),
        rate_fn=rates, gradient_fn=gradient, params=p,
        jump_labels=("infection", "recovery"),
        conserved=True, susceptible="s", infectious="i",
    )


@_entry("SIS", "lambda", "gamma")
def _sis(p):
    lam, gamma = p["lambda"], p["gamma"]

    def rates(t, z):
        x = z[0]
        return np.array([lam * x * (1.0 - x), gamma * x])

    def gradient(t, z):
        x = z[0]
        return np.array([[lam * (1.0 - 2.0 * x)], [gamma]])

    return CompartmentalModel(
        name="SIS", compartments=("i",),
        jumps=np.array([[1], [-1]]),
        rate_fn=rates, gradient_fn=gradient, params=p,
        jump_labels=("infection", "recovery"),
        reduced=True, infectious="i",
    )


@_entry("SIRS", "lambda", "gamma", "rho")
def _sirs(p):
    lam, gamma, rho = p["lambda"], p["gamma"], p["rho"]

    def rates(t, z):
        s, i = z[0], z[1]
        return np.array([lam * s * i, gamma * i, rho * (1.0 - s - i)])

    def gradient(t, z):
        s, i = z[0], z[1]
        return np.array([[lam * i, lam * s],
                         [0.0, gamma],
                         [-rho, -rho]])

    return CompartmentalModel(
        name="SIRS", compartments=("s", "i"),
        jumps=np.array([[-1, 1], [0, -1], [1, 0]]),
        rate_fn=rates, gradient_fn=gradient, params=p,
        jump_labels=("infection", "recovery", "waning"),
        reduced=True, susceptible="s", infectious="i",
    )


@_entry("SEIR", "lambda", "nu", "gamma")
def _seir(p):
    lam, nu, gamma = p["lambda"], p["nu"], p["gamma"]

    def rates(t, z):
        s, e, i = z[0], z[1], z[2]
        return np.array([lam * s * i, nu * e, gamma * i])

    def gradient(t, z):
        s, i = z[0], z[2]
        return np.array([[lam * i, 0.0, lam * s, 0.0],
                         [0.0, nu, 0.0, 0.0],
                         [0.0, 0.0, gamma, 0.0]])

    return CompartmentalModel(
        name="SEIR", compartments=("s", "e", "i", "r"),
        jumps=np.array([[-1, 1, 0, 0], [0, -1, 1, 0], [0, 0, -1, 1]]),
        rate_fn=rates, gradient_fn=gradient, params=p,
        jump_labels=("infection", "progression", "recovery"),
        conserved=True, susceptible="s", infectious="i",
    )


_SEIRS_CORE_JUMPS = [[-1, 1, 0, 0], [0, -1, 1, 0], [0, 0, -1, 1], [1, 0, 0, -1]]


def _seirs_core(p, z):
    s, e, i, r = z[0], z[1], z[2], z[3]
    return [p["lambda"] * s * i, p["nu"] * e, p["gamma"] * i, p["rho"] * r]


def _seirs_core_gradient(p, z):
    s, i = z[0], z[2]
    lam = p["lambda"]
    return [[lam * i, 0.0, lam * s, 0.0],
            [0.0, p["nu"], 0.0, 0.0],
            [0.0, 0.0, p["gamma"], 0.0],
            [0.0, 0.0, 0.0, p["rho"]]]


@_entry("SEIRS-demography", "lambda", "nu", "gamma", "rho", "mu")
def _seirs_demography(p):
    mu = p["mu"]

    def rates(t, z):
        return np.array(_seirs_core(p, z) + [mu, mu * z[0], mu * z[1], mu * z[2], mu * z[3]])

    def gradient(t, z):
        deaths = np.eye(4) * mu
        return np.vstack([_seirs_core_gradient(p, z), np.zeros((1, 4)), deaths])

    jumps = _SEIRS_CORE_JUMPS + [[1, 0, 0, 0]] + (-np.eye(4, dtype=int)).tolist()
    return CompartmentalModel(
        name="SEIRS-demography", compartments=("s", "e", "i", "r"),
        jumps=np.array(jumps), rate_fn=rates, gradient_fn=gradient, params=p,
        jump_labels=("infection", "progression", "recovery", "waning", "birth",
                     "death_s", "death_e", "death_i", "death_r"),
        susceptible="s", infectious="i",
    )


@_entry("SEIRS-constant", "lambda", "nu", "gamma", "rho", "mu")
def _seirs_constant(p):
    mu = p["mu"]

    def rates(t, z):
        return np.array(_seirs_core(p, z) + [mu * z[1], mu * z[2], mu * z[3]])

    def gradient(t, z):
        replacement = np.zeros((3, 4))
        replacement[[0, 1, 2], [1, 2, 3]] = mu
        return np.vstack([_seirs_core_gradient(p, z), replacement])

    # a death is immediately replaced by a susceptible birth
    jumps = _SEIRS_CORE_JUMPS + [[1, -1, 0, 0], [1, 0, -1, 0], [1, 0, 0, -1]]
    return CompartmentalModel(
        name="SEIRS-constant", compartments=("s", "e", "i", "r"),
        jumps=np.array(jumps), rate_fn=rates, gradient_fn=gradient, params=p,
        jump_labels=("infection", "progression", "recovery", "waning",
                     "turnover_e", "turnover_i", "turnover_r"),
        conserved=True, susceptible="s", infectious="i",
    )


@_entry("SIR-demography", "lambda", "gamma", "mu")
def _sir_demography(p):
    lam, gamma, mu = p["lambda"], p["gamma"], p["mu"]

    def rates(t, z):
        s, i = z[0], z[1]
        return np.array([mu, lam * s * i, mu * s, gamma * i, mu * i])

    def gradient(t, z):
        s, i = z[0], z[1]
        return np.array([[0.0, 0.0],
                         [lam * i, lam * s],
                         [mu, 0.0],
                         [0.0, gamma],
                         [0.0, mu]])

    return CompartmentalModel(
        name="SIR-demography", compartments=("s", "i"),
        jumps=np.array([[1, 0], [-1, 1], [-1, 0], [0, -1], [0, -1]]),
        rate_fn=rates, gradient_fn=gradient, params=p,
        jump_labels=("birth", "infection", "death_s", "recovery", "death_i"),
        susceptible="s", infectious="i",
    )


@_entry("Ross-malaria", "a", "p_vh", "p_hv", "m", "gamma", "mu")
def _ross_malaria(p):
    # z = (infected hosts, infected vectors) / host population
    a, p_vh, p_hv, m = p["a"], p["p_vh"], p["p_hv"], p["m"]
    gamma, mu = p["gamma"], p["mu"]
    if m <= 0:
        raise ModelDefinitionError("Ross-malaria: vector/host ratio m must be > 0")

    def rates(t, z):
        h, v = z[0], z[1]
        return np.array([a * p_vh * v * (1.0 - h), gamma * h,
                         a * m * p_hv * h * (1.0 - v / m), mu * v])

    def gradient(t, z):
        h, v = z[0], z[1]
        return np.array([[-a * p_vh * v, a * p_vh * (1.0 - h)],
                         [gamma, 0.0],
                         [a * m * p_hv * (1.0 - v / m), -a * p_hv * h],
                         [0.0, mu]])

    return CompartmentalModel(
        name="Ross-malaria", compartments=("h", "v"),
        jumps=np.array([[1, 0], [-1, 0], [0, 1], [0, -1]]),
        rate_fn=rates, gradient_fn=gradient, params=p,
        jump_labels=("infection", "recovery", "vector_infection", "vector_death"),
        upper=(1.0, m), infectious="h",
    )


# =============================================================================
# Threshold parametrisation of SIR with demography
# =============================================================================

def sir_demography_parameters(r0: float, eps: float, mu: float = 1.0) -> Dict[str, float]:
    """Rates with R0 = lambda/(gamma+mu) and eps = mu/(gamma+mu)."""
    if not 0 < eps < 1:
        raise ModelDefinitionError(f"eps must lie in (0, 1), got {eps}")
    return {"lambda": r0 * mu / eps, "gamma": mu / eps - mu, "mu": mu}


def sir_demography_thresholds(params: Mapping[str, float]) -> Tuple[float, float]:
    """(R0, eps) of an SIR-demography parameter set."""
    exit_rate = params["gamma"] + params["mu"]
    return params["lambda"] / exit_rate, params["mu"] / exit_rate
