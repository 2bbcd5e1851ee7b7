"""
Seirkit Large Deviations

Path costs of density-dependent jump processes, the SIS quasi-potential in
closed form and by quadrature, the optimal SIS exit path towards extinction
and the extinction-time scales that follow from the quasi-potential.

Costs use the local rate g(nu, omega) = nu log(nu / omega) - nu + omega,
with 0 log 0 = 0 and g(nu > 0, 0) = +inf.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Optional

import numpy as np
from scipy import integrate
from scipy.special import rel_entr

from .catalogue import CompartmentalModel, model_catalogue
from .deterministic import OdePath
from .errors import ModelDefinitionError, PathMismatchError

logger = logging.getLogger(__name__)

DEFAULT_OFFSET = 1e-3


@dataclass(frozen=True)
class ControlledPath:
    """States phi on a uniform grid and the jump fluxes c_j >= 0 driving them.

    Controls live at the grid nodes and are read as piecewise linear.
    """

    grid: np.ndarray
    states: np.ndarray
    controls: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        states = np.asarray(self.states, dtype=float)
        controls = np.asarray(self.controls, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        if grid.ndim != 1 or len(grid) < 2:
            raise ModelDefinitionError("a controlled path needs at least two grid points")
        if len(states) != len(grid) or len(controls) != len(grid):
            raise ModelDefinitionError("grid, states and controls must have the same length")
        steps = np.diff(grid)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise ModelDefinitionError("controlled paths live on a uniform increasing grid")
        if np.any(controls < 0) or not np.all(np.isfinite(controls)):
            raise ModelDefinitionError("controls must be finite and >= 0")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "controls", controls)

    @property
    def horizon(self) -> float:
        return float(self.grid[-1] - self.grid[0])


@dataclass(frozen=True)
class QuasiPotential:
    value: float
    model: str
    parameters: Dict[str, float] = field(default_factory=dict)

    def central_scale(self, N: int) -> float:
        """exp(N * V), +inf once it overflows."""
        with np.errstate(over="ignore"):
            return float(np.exp(N * self.value))

    def report(self, populations: Iterable[int] = ()) -> Dict[str, Any]:
        return {
            "model": self.model,
            "V_bar": self.value,
            "parameters": dict(self.parameters),
            "central_scale": {str(n): self.central_scale(n) for n in populations},
        }


@dataclass(frozen=True)
class ExtinctionTimeScale:
    lower: float
    upper: float
    central: float
    slack: float


# =============================================================================
# Costs
# =============================================================================

def rate_integrand(nu, omega):
    """g(nu, omega) elementwise; scalars in, float out."""
    nu_arr = np.asarray(nu, dtype=float)
    omega_arr = np.asarray(omega, dtype=float)
    if np.any(nu_arr < 0) or np.any(omega_arr < 0):
        raise ModelDefinitionError("flux and rate must be >= 0")
    out = rel_entr(nu_arr, omega_arr) - nu_arr + omega_arr
    return float(out) if np.ndim(out) == 0 else out


def path_cost(path: ControlledPath, model: CompartmentalModel, tol: float = 1e-6) -> float:
    """Trapezoidal integral of sum_j g(c_j(t), beta_j(phi_t)) over the grid.

    Each segment must satisfy (phi_{n+1} - phi_n) / h = sum_j h_j (c_j(t_n) + c_j(t_{n+1})) / 2
    within tol * (1 + |phi_n|).
    """
    if path.states.shape[1] != model.dimension or path.controls.shape[1] != model.n_jumps:
        raise ModelDefinitionError(
            f"{model.name}: path needs {model.dimension} state and {model.n_jumps} control components")
    step = np.diff(path.grid)[:, None]
    velocity = np.diff(path.states, axis=0) / step
    flux = 0.5 * (path.controls[:-1] + path.controls[1:]) @ model.jumps
    mismatch = np.abs(velocity - flux).max(axis=1)
    allowed = tol * (1.0 + np.linalg.norm(path.states[:-1], axis=1))
    bad = np.flatnonzero(mismatch > allowed)
    if bad.size:
        n = int(bad[0])
        raise PathMismatchError(
            f"states do not follow the controls on segment {n} (t={path.grid[n]:.6g}, "
            f"mismatch {mismatch[n]:.3g})")

    rates = np.array([model.rates(t, z) for t, z in zip(path.grid, path.states)])
    if np.any(rates < -1e-12):
        raise ModelDefinitionError(f"{model.name}: negative rate along the path")
    density = rate_integrand(path.controls, np.clip(rates, 0.0, None)).sum(axis=1)
    if np.any(np.isinf(density)):
        return math.inf
    return float(integrate.trapezoid(density, path.grid))


def unperturbed_path(model: CompartmentalModel, path: OdePath) -> ControlledPath:
    """An ODE path with its own rates as controls; costs zero up to quadrature error."""
    controls = np.array([np.clip(model.rates(t, z), 0.0, None) for t, z in zip(path.grid, path.values)])
    return ControlledPath(grid=path.grid, states=path.values, controls=controls)


def hamiltonian(model: CompartmentalModel, z, p, t: float = 0.0) -> float:
    """sum_j beta_j(z) (exp(<h_j, p>) - 1)."""
    momentum = np.atleast_1d(np.asarray(p, dtype=float))
    return float(model.rates(t, np.atleast_1d(z)) @ np.expm1(model.jumps @ momentum))


# =============================================================================
# SIS
# =============================================================================

def _sis_check(lam: float, gamma: float) -> float:
    if gamma <= 0:
        raise ModelDefinitionError(f"gamma must be > 0, got {gamma}")
    if lam <= gamma:
        raise ModelDefinitionError(f"quasi-potential needs R0 = lambda/gamma > 1, got {lam / gamma:.6g}")
    return 1.0 - gamma / lam


def sis_endemic_level(lam: float, gamma: float) -> float:
    """x* = 1 - gamma / lambda."""
    return _sis_check(lam, gamma)


def sis_quasipotential(lam: float, gamma: float, method: str = "closed") -> QuasiPotential:
    """Cost of the cheapest route from the endemic level to extinction.

    ``closed`` gives log R0 - 1 + 1/R0; ``quadrature`` integrates
    log(lambda (1 - x) / gamma) over [0, x*].
    """
    x_star = _sis_check(lam, gamma)
    if method == "closed":
        r0 = lam / gamma
        value = math.log(r0) - 1.0 + 1.0 / r0
    elif method == "quadrature":
        value, _ = integrate.quad(lambda x: -math.log(gamma / (lam * (1.0 - x))), 0.0, x_star,
                                  epsabs=1e-13, epsrel=1e-13)
    else:
        raise ModelDefinitionError(f"unknown quasi-potential method {method!r}")
    return QuasiPotential(value=value, model="SIS", parameters={"lambda": lam, "gamma": gamma})


def sis_quasipotential_difference(lam: float, gamma: float, x_from: float, x_to: float) -> float:
    """Integral of log(lambda (1 - x) / gamma) from x_to to x_from.

    Lower bound for the cost of any path from x_from to x_to.
    """
    if lam <= 0 or gamma <= 0:
        raise ModelDefinitionError("lambda and gamma must be > 0")
    if not (0 <= x_from < 1 and 0 <= x_to < 1):
        raise ModelDefinitionError("SIS levels must lie in [0, 1)")

    def antiderivative(x: float) -> float:
        u = 1.0 - x
        return u - u * math.log(lam * u / gamma)

    return antiderivative(x_from) - antiderivative(x_to)


def sis_costate(lam: float, gamma: float, x):
    """p(x) = log(gamma / (lambda (1 - x))) along the optimal exit path."""
    x = np.asarray(x, dtype=float)
    out = np.log(gamma / (lam * (1.0 - x)))
    return float(out) if out.ndim == 0 else out


def sis_optimal_path(
    lam: float,
    gamma: float,
    from_x: Optional[float] = None,
    to_x: float = DEFAULT_OFFSET,
    step: float = 1e-3,
) -> ControlledPath:
    """Time-reversed SIS flow dx/dt = gamma x - lambda x (1 - x) from from_x down to to_x.

    Infection runs at flux gamma x and recovery at lambda x (1 - x), the
    two rates swapped. The travel time is known in closed form, so the grid
    is uniform and ends on to_x up to the RK4 error. ``from_x`` defaults to
    x* minus the default offset.
    """
    x_star = _sis_check(lam, gamma)
    if from_x is None:
        from_x = x_star - DEFAULT_OFFSET
    if not 0 < to_x < from_x < x_star:
        raise ModelDefinitionError(
            f"need 0 < to_x < from_x < x* = {x_star:.6g}, got to_x={to_x}, from_x={from_x}")
    if step <= 0:
        raise ModelDefinitionError(f"step must be > 0, got {step}")

    def travel(x: float) -> float:
        return math.log((x_star - x) / x) / (lam * x_star)

    horizon = travel(to_x) - travel(from_x)
    n_steps = max(1, math.ceil(horizon / step))
    grid = np.linspace(0.0, horizon, n_steps + 1)
    h = horizon / n_steps

    def flow(x: float) -> float:
        return gamma * x - lam * x * (1.0 - x)

    xs = np.empty(n_steps + 1)
    x = from_x
    xs[0] = x
    for n in range(n_steps):
        k1 = flow(x)
        k2 = flow(x + h / 2 * k1)
        k3 = flow(x + h / 2 * k2)
        k4 = flow(x + h * k3)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        xs[n + 1] = x
    logger.debug("SIS exit path: %d steps over t=%.6g, end %.3g (target %.3g)", n_steps, horizon, x, to_x)

    controls = np.column_stack([gamma * xs, lam * xs * (1.0 - xs)])
    return ControlledPath(grid=grid, states=xs[:, None], controls=controls)


def sis_controls(lam: float, gamma: float, states, velocities) -> np.ndarray:
    """Cheapest (infection, recovery) fluxes producing the given velocities.

    Pointwise minimiser of g(c1, beta1) + g(c2, beta2) subject to c1 - c2 = v:
    c1 = beta1 y, c2 = beta2 / y with beta1 y^2 - v y - beta2 = 0.
    """
    x = np.asarray(states, dtype=float).ravel()
    v = np.asarray(velocities, dtype=float).ravel()
    if np.any(x <= 0) or np.any(x >= 1):
        raise ModelDefinitionError("SIS controls need states inside (0, 1)")
    infection, recovery = lam * x * (1.0 - x), gamma * x
    y = (v + np.sqrt(v * v + 4.0 * infection * recovery)) / (2.0 * infection)
    return np.column_stack([infection * y, recovery / y])


def sis_model(lam: float, gamma: float) -> CompartmentalModel:
    return model_catalogue("SIS", {"lambda": lam, "gamma": gamma})


# =============================================================================
# Extinction times
# =============================================================================

def extinction_time_scale(N: int, qp: QuasiPotential, slack: float = 2.0) -> ExtinctionTimeScale:
    """Bracket exp(N (V - log c)) < T_ext < exp(N (V + log c)) and the central exp(N V)."""
    if N < 1:
        raise ModelDefinitionError(f"N must be >= 1, got {N}")
    if slack <= 1:
        raise ModelDefinitionError(f"slack c must be > 1, got {slack}")
    if qp.value <= 0:
        raise ModelDefinitionError("extinction-time scales need a supercritical model (V > 0)")
    log_c = math.log(slack)
    with np.errstate(over="ignore"):
        lower = float(np.exp(N * (qp.value - log_c)))
        upper = float(np.exp(N * (qp.value + log_c)))
    return ExtinctionTimeScale(lower=lower, upper=upper, central=qp.central_scale(N), slack=slack)
