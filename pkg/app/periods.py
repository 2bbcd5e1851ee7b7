"""
Seirkit Period Distributions

Latent and infectious period laws (constant, exponential, Erlang) with the
moment generating function psi(theta) = E[exp(theta * X)] used throughout.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, Literal, Optional, Union

import mpmath
import numpy as np
from scipy import integrate, stats

from .errors import ModelDefinitionError

PeriodKind = Literal["constant", "exponential", "gamma"]
ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class PeriodDistribution:
    """A nonnegative duration law.

    Only one parameter group is meaningful per kind: ``value`` for constant,
    ``rate`` for exponential, ``shape`` and ``scale`` for gamma. Gamma shapes
    are integers so the law is a sum of exponentials.
    """

    kind: PeriodKind
    value: float = 0.0
    rate: float = 0.0
    shape: int = 1
    scale: float = 0.0

    def __post_init__(self):
        if self.kind == "constant":
            if not (math.isfinite(self.value) and self.value >= 0):
                raise ModelDefinitionError(f"constant period must be >= 0, got {self.value}")
        elif self.kind == "exponential":
            if not (math.isfinite(self.rate) and self.rate > 0):
                raise ModelDefinitionError(f"exponential rate must be > 0, got {self.rate}")
        elif self.kind == "gamma":
            if int(self.shape) != self.shape or self.shape < 1:
                raise ModelDefinitionError(f"gamma shape must be a positive integer, got {self.shape}")
            if not (math.isfinite(self.scale) and self.scale > 0):
                raise ModelDefinitionError(f"gamma scale must be > 0, got {self.scale}")
        else:
            raise ModelDefinitionError(f"unknown period kind {self.kind!r}")

    # =========================================================================
    # Constructors
    # =========================================================================

    @classmethod
    def constant(cls, value: float) -> "PeriodDistribution":
        return cls(kind="constant", value=float(value))

    @classmethod
    def exponential(cls, rate: float) -> "PeriodDistribution":
        return cls(kind="exponential", rate=float(rate))

    @classmethod
    def gamma(cls, shape: int, scale: float) -> "PeriodDistribution":
        return cls(kind="gamma", shape=int(shape), scale=float(scale))

    # =========================================================================
    # Moments
    # =========================================================================

    @property
    def mean(self) -> float:
        if self.kind == "constant":
            return self.value
        if self.kind == "exponential":
            return 1.0 / self.rate
        return self.shape * self.scale

    @property
    def variance(self) -> float:
        if self.kind == "constant":
            return 0.0
        if self.kind == "exponential":
            return 1.0 / self.rate ** 2
        return self.shape * self.scale ** 2

    @property
    def cv2(self) -> float:
        """Squared coefficient of variation, variance / mean**2."""
        if self.mean == 0:
            return 0.0
        return self.variance / self.mean ** 2

    @property
    def abscissa(self) -> float:
        """Supremum of theta for which the mgf is finite."""
        if self.kind == "constant":
            return math.inf
        if self.kind == "exponential":
            return self.rate
        return 1.0 / self.scale

    @property
    def is_degenerate(self) -> bool:
        return self.kind == "constant" and self.value == 0

    # =========================================================================
    # Transforms
    # =========================================================================

    def mgf(self, theta: ArrayLike) -> ArrayLike:
        """psi(theta) = E[exp(theta X)]; +inf at or beyond the abscissa."""
        th = np.asarray(theta, dtype=float)
        if self.kind == "constant":
            out = np.exp(th * self.value)
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                if self.kind == "exponential":
                    out = self.rate / (self.rate - th)
                else:
                    out = (1.0 - th * self.scale) ** (-self.shape)
            out = np.where(th < self.abscissa, out, np.inf)
        return float(out) if out.ndim == 0 else out

    def exact_mgf(self, theta: Union[Fraction, "mpmath.mpf"]):
        """psi(theta) in the arithmetic of ``theta``.

        Fraction in, Fraction out for the exponential and gamma kinds; the
        constant kind is transcendental and always returns an mpmath float
        at the current working precision.
        """
        if self.kind == "constant":
            if isinstance(theta, Fraction):
                theta = mpmath.mpf(theta.numerator) / theta.denominator
            return mpmath.exp(mpmath.mpf(theta) * mpmath.mpf(self.value))
        if isinstance(theta, Fraction):
            if self.kind == "exponential":
                rate = Fraction(self.rate)
                return rate / (rate - theta)
            return (1 - theta * Fraction(self.scale)) ** (-self.shape)
        if self.kind == "exponential":
            rate = mpmath.mpf(self.rate)
            return rate / (rate - theta)
        return (1 - theta * mpmath.mpf(self.scale)) ** (-self.shape)

    @property
    def has_rational_mgf(self) -> bool:
        return self.kind != "constant" or self.value == 0

    def discounted_mean(self, r: float) -> float:
        """E[(1 - exp(-r X)) / r], the expected time in the period discounted at rate r.

        Finite for r > -abscissa; equals the mean at r = 0.
        """
        if r == 0:
            return self.mean
        if r <= -self.abscissa:
            return math.inf
        if self.kind == "constant":
            return -math.expm1(-r * self.value) / r
        if self.kind == "exponential":
            return 1.0 / (self.rate + r)
        return -math.expm1(-self.shape * math.log1p(r * self.scale)) / r

    # =========================================================================
    # Sampling and quadrature
    # =========================================================================

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> ArrayLike:
        if self.kind == "constant":
            return self.value if size is None else np.full(size, self.value)
        if self.kind == "exponential":
            return rng.exponential(1.0 / self.rate, size)
        return rng.gamma(self.shape, self.scale, size)

    def frozen(self):
        """The matching scipy.stats frozen law (None for a point mass)."""
        if self.kind == "exponential":
            return stats.expon(scale=1.0 / self.rate)
        if self.kind == "gamma":
            return stats.gamma(a=self.shape, scale=self.scale)
        return None

    def expect(self, fn: Callable[[float], float], epsabs: float = 1e-10) -> float:
        """E[fn(X)] by adaptive quadrature against the density."""
        law = self.frozen()
        if law is None:
            return float(fn(self.value))
        value, _ = integrate.quad(lambda x: fn(x) * law.pdf(x), 0.0, np.inf,
                                  epsabs=epsabs, limit=200)
        return value

    def describe(self) -> Dict[str, Any]:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        if self.kind == "exponential":
            return {"kind": "exponential", "rate": self.rate}
        return {"kind": "gamma", "shape": self.shape, "scale": self.scale}
