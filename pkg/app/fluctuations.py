"""
Seirkit Gaussian Fluctuations

Linear-noise analysis around the deterministic limit: the drift Jacobian A
and noise factor C (columns h_j sqrt(beta_j)), stationary covariances from
A V + V A^T + C C^T = 0, covariance propagation in time, and Euler-Maruyama
paths of the diffusion approximation.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from .catalogue import CompartmentalModel
from .deterministic import OdePath, uniform_grid
from .errors import ModelDefinitionError, UnstableEquilibriumError
from .streams import SeedSpec

logger = logging.getLogger(__name__)


@dataclass
class LinearizedSystem:
    A: np.ndarray
    C: np.ndarray
    reference: np.ndarray

    @property
    def diffusion(self) -> np.ndarray:
        """C C^T."""
        return self.C @ self.C.T


@dataclass
class StationaryCovariance:
    V: np.ndarray
    residual: float


def linearize(model: CompartmentalModel, point: Sequence[float], t: float = 0.0) -> LinearizedSystem:
    """Drift Jacobian and noise factor of ``model`` at ``point``."""
    z = np.asarray(point, dtype=float)
    rates = model.rates(t, z)
    if np.any(rates < -1e-12):
        raise ModelDefinitionError(f"{model.name}: negative rate {rates.min():.3g} at {z}")
    noise = model.jumps.T * np.sqrt(np.clip(rates, 0.0, None))
    return LinearizedSystem(A=model.jacobian(t, z), C=noise, reference=z)


def lyapunov_solve(A: np.ndarray, C: np.ndarray) -> StationaryCovariance:
    """Unique symmetric solution of A V + V A^T + C C^T = 0 for stable A."""
    A = np.asarray(A, dtype=float)
    C = np.atleast_2d(np.asarray(C, dtype=float))
    spectrum = np.linalg.eigvals(A)
    if np.any(spectrum.real >= 0):
        raise UnstableEquilibriumError(
            f"drift matrix is not stable: max real eigenvalue {spectrum.real.max():.3g}")
    V = linalg.solve_continuous_lyapunov(A, -(C @ C.T))
    V = 0.5 * (V + V.T)
    return StationaryCovariance(V=V, residual=lyapunov_residual(A, C, V))


def lyapunov_residual(A: np.ndarray, C: np.ndarray, V: np.ndarray) -> float:
    """Frobenius norm of A V + V A^T + C C^T."""
    A = np.asarray(A, dtype=float)
    C = np.atleast_2d(np.asarray(C, dtype=float))
    V = np.asarray(V, dtype=float)
    return float(np.linalg.norm(A @ V + V @ A.T + C @ C.T))


def oscillation_threshold(r0: float) -> float:
    """4 (R0 - 1) / R0^2: the SIR-demography endemic point is a focus iff eps lies below it.

    The linearization there is mu [[-R0, -1/eps], [R0 - 1, 0]], whose
    discriminant R0^2 - 4 (R0 - 1) / eps is negative exactly below this bound.
    For large R0 the bound is close to 4 / R0.
    """
    if r0 <= 1:
        raise ModelDefinitionError("no endemic point for R0 <= 1")
    return 4.0 * (r0 - 1.0) / r0 ** 2


def nasell_covariance(r0: float, eps: float) -> np.ndarray:
    """Closed-form stationary covariance of (s, i) for SIR with demography, in units of 1/N."""
    return np.array([
        [1.0 / r0 + 1.0 / (eps * r0 ** 2), -1.0 / r0],
        [-1.0 / r0, 1.0 / r0 - 1.0 / r0 ** 2 + eps],
    ])


def stationary_infective_variance(r0: float) -> float:
    """1/R0 - 1/R0^2, the infective entry of the covariance with the eps term dropped."""
    if r0 <= 1:
        raise ModelDefinitionError("stationary variance needs R0 > 1")
    return 1.0 / r0 - 1.0 / r0 ** 2


def propagate_covariance(system: LinearizedSystem, v0: np.ndarray, t: float) -> np.ndarray:
    """V(t) = e^{tA} [V0 + int_0^t e^{-sA} C C^T e^{-sA^T} ds] e^{tA^T} for constant A, C."""
    A, Q = system.A, system.diffusion
    d = A.shape[0]
    block = np.zeros((2 * d, 2 * d))
    block[:d, :d] = -A
    block[:d, d:] = Q
    block[d:, d:] = A.T
    flow = linalg.expm(block * t)
    forward = flow[d:, d:].T
    integral = forward @ flow[:d, d:]
    return forward @ np.asarray(v0, dtype=float) @ forward.T + integral


def ou_variance_along_path(
    model: CompartmentalModel,
    path: OdePath,
    v0: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Covariance of the Gaussian fluctuation along a deterministic path.

    RK4 for dV/dt = A(t) V + V A(t)^T + C(t) C(t)^T on the path grid,
    midpoints taken as the average of neighbouring path values.
    """
    d = model.dimension
    V = np.zeros((d, d)) if v0 is None else np.asarray(v0, dtype=float)
    out = np.empty((len(path.grid), d, d))
    out[0] = V

    def rhs(t, z, V):
        system = linearize(model, z, t)
        return system.A @ V + V @ system.A.T + system.diffusion

    for n in range(len(path.grid) - 1):
        t, h = path.grid[n], path.grid[n + 1] - path.grid[n]
        z0, z1 = path.values[n], path.values[n + 1]
        zm = 0.5 * (z0 + z1)
        k1 = rhs(t, z0, V)
        k2 = rhs(t + h / 2, zm, V + h / 2 * k1)
        k3 = rhs(t + h / 2, zm, V + h / 2 * k2)
        k4 = rhs(t + h, z1, V + h * k3)
        V = V + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[n + 1] = V
    return out


def diffusion_simulate(
    model: CompartmentalModel,
    N: float,
    init: Sequence[float],
    horizon: float,
    step: Optional[float],
    seed: SeedSpec,
) -> OdePath:
    """Euler-Maruyama path of dX = b(X) dt + sum_j h_j sqrt(beta_j(X) / N) dB_j.

    Rates are evaluated at the positive part of the state and negative rates
    are clamped to zero. N = inf gives the explicit Euler ODE path.
    """
    grid = uniform_grid(horizon, step)
    z = np.asarray(init, dtype=float).copy()
    values = np.empty((len(grid), model.dimension))
    values[0] = z
    noise_scale = 0.0 if math.isinf(N) else 1.0 / math.sqrt(N)
    rng = seed.generator()
    H = model.jumps.T

    for n in range(len(grid) - 1):
        t, h = grid[n], grid[n + 1] - grid[n]
        beta = np.clip(model.rates(t, np.clip(z, 0.0, None)), 0.0, None)
        dW = rng.normal(0.0, math.sqrt(h), size=model.n_jumps)
        z = z + h * (H @ beta) + noise_scale * (H @ (np.sqrt(beta) * dW))
        values[n + 1] = z

    return OdePath(grid=grid, values=values, system=model.name, compartments=model.compartments)
