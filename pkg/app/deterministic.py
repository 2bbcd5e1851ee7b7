"""
Seirkit Deterministic Limits

Fixed-step Runge-Kutta paths of the law-of-large-numbers ODE dz/dt = b(t, z),
endemic equilibria, critical community sizes and the Ross malaria system.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .catalogue import CompartmentalModel, model_catalogue
from .config import get_settings
from .errors import ModelDefinitionError, NoEndemicStateError, RegionViolationError

logger = logging.getLogger(__name__)

_REGION_TOL = 1e-9


@dataclass
class OdePath:
    grid: np.ndarray
    values: np.ndarray
    system: str
    compartments: Tuple[str, ...]

    def column(self, compartment: str) -> np.ndarray:
        return self.values[:, self.compartments.index(compartment)]

    @property
    def final(self) -> np.ndarray:
        return self.values[-1]

    def at(self, times: Sequence[float]) -> np.ndarray:
        """Linear interpolation of every component at ``times``."""
        times = np.asarray(times, dtype=float)
        return np.column_stack([np.interp(times, self.grid, self.values[:, k])
                                for k in range(self.values.shape[1])])


@dataclass(frozen=True)
class EndemicState:
    s_hat: float
    i_hat: float
    r_hat: float


def uniform_grid(horizon: float, step: Optional[float]) -> np.ndarray:
    if horizon <= 0:
        raise ModelDefinitionError(f"horizon must be > 0, got {horizon}")
    if step is None:
        step = horizon / get_settings().ode_steps
    if step <= 0:
        raise ModelDefinitionError(f"step must be > 0, got {step}")
    n_steps = max(1, math.ceil(horizon / step - 1e-9))
    return np.linspace(0.0, horizon, n_steps + 1)


def integrate(
    model: CompartmentalModel,
    init: Sequence[float],
    horizon: float,
    step: Optional[float] = None,
) -> OdePath:
    """Classical RK4 solution of dz/dt = sum_j h_j beta_j(t, z) on a uniform grid."""
    z = np.asarray(init, dtype=float)
    if z.shape != (model.dimension,):
        raise ModelDefinitionError(f"{model.name}: initial state needs {model.dimension} components")
    if not model.in_region(z, _REGION_TOL):
        raise RegionViolationError(f"{model.name}: initial state {z} outside the model region")
    grid = uniform_grid(horizon, step)
    values = np.empty((len(grid), model.dimension))
    values[0] = z
    mass = z.sum()
    f = model.drift

    for n in range(len(grid) - 1):
        t, h = grid[n], grid[n + 1] - grid[n]
        k1 = f(t, z)
        k2 = f(t + h / 2, z + h / 2 * k1)
        k3 = f(t + h / 2, z + h / 2 * k2)
        k4 = f(t + h, z + h * k3)
        z = z + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not model.in_region(z, _REGION_TOL) or (
                model.conserved and abs(z.sum() - mass) > _REGION_TOL):
            raise RegionViolationError(
                f"{model.name}: path left the invariant region at t={grid[n + 1]:.6g}; reduce the step")
        values[n + 1] = z

    return OdePath(grid=grid, values=values, system=model.name, compartments=model.compartments)


def epidemic_start(model: CompartmentalModel, init_fraction: Optional[float] = None) -> np.ndarray:
    """A few infectives in a susceptible population: i(0) = init_fraction, s(0) = 1 - i(0)."""
    if init_fraction is None:
        init_fraction = get_settings().default_init_fraction
    z = np.zeros(model.dimension)
    z[model.index(model.infectious)] = init_fraction
    if model.susceptible is not None:
        z[model.index(model.susceptible)] = 1.0 - init_fraction
    return z


# =============================================================================
# Open populations
# =============================================================================

def endemic_equilibrium(r0: float, eps: float) -> EndemicState:
    """Stable state of SIR with demography, eps = mu / (gamma + mu)."""
    if r0 <= 1:
        raise NoEndemicStateError(f"no endemic state for R0={r0} <= 1")
    if not 0 < eps < 1:
        raise ModelDefinitionError(f"eps must lie in (0, 1), got {eps}")
    s_hat = 1.0 / r0
    i_hat = eps * (1.0 - s_hat)
    return EndemicState(s_hat=s_hat, i_hat=i_hat, r_hat=1.0 - s_hat - i_hat)


def critical_community_size(r0: float, eps: float, coverage: float = 0.0) -> float:
    """Population size below which the infection fades out quickly.

    9 / ((1-v)^2 eps^2 (1 - 1/((1-v) R0))^2 R0); infinite when (1-v) R0 <= 1.
    """
    if not 0 < eps < 1:
        raise ModelDefinitionError(f"eps must lie in (0, 1), got {eps}")
    if not 0 <= coverage <= 1:
        raise ModelDefinitionError(f"coverage must lie in [0, 1], got {coverage}")
    effective = (1.0 - coverage) * r0
    if effective <= 1:
        return math.inf
    return 9.0 / ((1.0 - coverage) ** 2 * eps ** 2 * (1.0 - 1.0 / effective) ** 2 * r0)


# =============================================================================
# Ross malaria
# =============================================================================

def _ross_params(a, p_vh, p_hv, m, gamma, mu):
    return {"a": a, "p_vh": p_vh, "p_hv": p_hv, "m": m, "gamma": gamma, "mu": mu}


def ross_malaria_path(
    a: float, p_vh: float, p_hv: float, m: float, gamma: float, mu: float,
    init: Sequence[float], horizon: float, step: Optional[float] = None,
) -> OdePath:
    """Infected host and vector fractions (h, v) under the Ross system.

    dh/dt = a p_vh m v (1 - h) - gamma h,  dv/dt = a p_hv h (1 - v) - mu v.
    """
    h0, v0 = init
    if not (0 <= h0 <= 1 and 0 <= v0 <= 1):
        raise ModelDefinitionError(f"initial fractions must lie in [0, 1], got {init}")
    model = model_catalogue("Ross-malaria", _ross_params(a, p_vh, p_hv, m, gamma, mu))
    path = integrate(model, [h0, m * v0], horizon, step)
    values = path.values.copy()
    values[:, 1] /= m
    return OdePath(grid=path.grid, values=values, system="Ross-malaria", compartments=("h", "v"))


def ross_malaria_equilibrium(
    a: float, p_vh: float, p_hv: float, m: float, gamma: float, mu: float,
) -> Tuple[float, float]:
    """Endemic (h*, v*) of the Ross system, (0, 0) when R0^2 = a^2 p_vh p_hv m / (gamma mu) <= 1."""
    if gamma <= 0 or mu <= 0:
        raise ModelDefinitionError("Ross equilibrium needs gamma > 0 and mu > 0")
    r0_sq = a * a * p_vh * p_hv * m / (gamma * mu)
    if r0_sq <= 1:
        return 0.0, 0.0
    h = (r0_sq - 1.0) / (r0_sq + a * p_hv / mu)
    return h, a * p_hv * h / (a * p_hv * h + mu)
