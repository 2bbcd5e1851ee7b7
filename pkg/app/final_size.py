"""
Seirkit Final Size

Exact final-size laws (chain-binomial enumeration and the triangular
recursion over subsets of susceptibles) and the large-population results:
the final-size equation with and without vaccination and the Gaussian
moments of major outbreaks.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cache
from typing import Any, Callable, Dict, List, Literal, Optional, Tuple

import mpmath
import numpy as np
from scipy import optimize

from .branching import OffspringLaw, extinction_probability
from .config import get_settings
from .epidemic import (
    EpidemicParams, VaccinationPolicy, basic_reproduction_number, vaccinated_reproduction_number,
)
from .errors import ModelDefinitionError, NumericalInstabilityError, UnsupportedCombinationError
from .periods import PeriodDistribution

logger = logging.getLogger(__name__)

Precision = Literal["float64", "high"]


@dataclass(frozen=True)
class FinalSizePMF:
    """p_k = P(Z = k) for k = 0..n.

    ``probs`` holds floats in float64 mode and Fractions or mpmath floats in
    high-precision mode.
    """

    n: int
    probs: Tuple[Any, ...]
    precision: Precision

    def as_array(self) -> np.ndarray:
        return np.array([float(p) for p in self.probs])

    def total(self):
        return sum(self.probs)

    def mean(self) -> float:
        return float(np.dot(np.arange(self.n + 1), self.as_array()))

    def describe(self) -> Dict[str, Any]:
        return {"n": self.n, "precision": self.precision, "probs": self.as_array().tolist()}


@dataclass(frozen=True)
class OutbreakAsymptotics:
    z_star: float
    minor_prob: float
    clt_mean: float
    clt_sd: float


@dataclass(frozen=True)
class PolicyFinalSize:
    """Attack fractions among the unvaccinated, the vaccinated and the whole community."""

    unvaccinated: float
    vaccinated: float
    community: float


# =============================================================================
# Exact laws
# =============================================================================

def chain_binomial_distribution(
    n: int,
    p,
    initial_infectives: int = 1,
    max_n: Optional[int] = None,
) -> FinalSizePMF:
    """Reed-Frost final-size law by summing over generation chains.

    Chain probabilities only depend on (susceptibles left, infectives in the
    current generation), so partial sums are memoised on that pair. Passing
    ``p`` as a Fraction keeps the computation exact.
    """
    max_n = max_n or get_settings().chain_binomial_max_n
    if n > max_n:
        raise UnsupportedCombinationError(f"chain enumeration is limited to n <= {max_n}, got {n}")
    if n < 1:
        raise ModelDefinitionError(f"n must be >= 1, got {n}")
    if not 0 <= p <= 1:
        raise ModelDefinitionError(f"p must lie in [0, 1], got {p}")
    exact = isinstance(p, Fraction)
    one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
    escape_one = one - p

    @cache
    def further(s: int, i: int) -> Tuple:
        # law of the number of infections still to come
        out = [zero] * (s + 1)
        if i == 0 or s == 0:
            out[0] = one
            return tuple(out)
        escape = escape_one ** i
        hit = one - escape
        for j in range(s + 1):
            weight = math.comb(s, j) * hit ** j * escape ** (s - j)
            if weight == 0:
                continue
            for t, tail in enumerate(further(s - j, j)):
                out[j + t] += weight * tail
        return tuple(out)

    return FinalSizePMF(n=n, probs=further(n, initial_infectives),
                        precision="high" if exact else "float64")


def _ball_recursion(n: int, m: int, psi_at: Callable[[int], Any], to_num: Callable[[int], Any]) -> List[Any]:
    probs: List[Any] = []
    for k in range(n + 1):
        psi = psi_at(k)
        powers = [to_num(1)]
        for _ in range(k + m):
            powers.append(powers[-1] * psi)
        value = to_num(math.comb(n, k)) * powers[k + m]
        for i, p_i in enumerate(probs):
            value -= to_num(math.comb(n - i, k - i)) * powers[k - i] * p_i
        probs.append(value)
    return probs


def exact_final_size_distribution(
    n: int,
    contact_rate: float,
    infectious: PeriodDistribution,
    precision: Optional[Precision] = None,
    initial_infectives: int = 1,
) -> FinalSizePMF:
    """Final-size law of the SEIR epidemic with n susceptibles.

    p_k = C(n, k) psi^(k+m) - sum_{i<k} C(n-i, k-i) psi^(k-i) p_i with
    psi = psi_I(-(n-k) lambda / n) and m index cases; p_0 = psi_I(-lambda)^m.
    Without an explicit precision, float64 is used up to the configured
    size and high precision beyond it.
    """
    if n < 1:
        raise ModelDefinitionError(f"n must be >= 1, got {n}")
    settings = get_settings()
    m = initial_infectives
    if precision is None:
        precision = "float64" if n <= settings.float64_warn_n else "high"

    if precision == "float64":
        if n > settings.float64_warn_n:
            logger.warning("float64 final-size recursion with n=%d is numerically unstable", n)
        try:
            probs = _ball_recursion(
                n, m, lambda k: infectious.mgf(-(n - k) * contact_rate / n), float)
        except OverflowError as exc:
            raise NumericalInstabilityError(
                f"float64 overflow at n={n}; use precision='high'") from exc
        worst = min(probs)
        if worst < -1e-9 or max(probs) > 1 + 1e-9 or not math.isfinite(sum(probs)):
            raise NumericalInstabilityError(
                f"float64 recursion produced probability {worst:.3g} at n={n}; use precision='high'")
        probs = [min(max(p, 0.0), 1.0) for p in probs]
        return FinalSizePMF(n=n, probs=tuple(probs), precision="float64")

    if infectious.has_rational_mgf and n <= settings.rational_max_n:
        rate = Fraction(contact_rate)
        probs = _ball_recursion(
            n, m, lambda k: infectious.exact_mgf(-(n - k) * rate / n), Fraction)
        return FinalSizePMF(n=n, probs=tuple(probs), precision="high")

    bits = max(settings.high_precision_bits, n + 160)
    with mpmath.workprec(bits):
        rate = mpmath.mpf(contact_rate)
        probs = _ball_recursion(
            n, m, lambda k: infectious.exact_mgf(-(n - k) * rate / n), mpmath.mpf)
    return FinalSizePMF(n=n, probs=tuple(probs), precision="high")


# =============================================================================
# Large-population results
# =============================================================================

def _positive_root(fn: Callable[[float], float]) -> float:
    """Root in (0, 1] of a function positive just above 0 and negative at 1; 0 if none."""
    lo = 1e-9
    while fn(lo) <= 0:
        lo *= 1e-3
        if lo < 1e-300:
            return 0.0
    return optimize.brentq(fn, lo, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def final_size_root(r0: float) -> float:
    """Positive root of 1 - z = exp(-R0 z), or 0 when R0 <= 1."""
    if r0 <= 0:
        raise ModelDefinitionError(f"R0 must be > 0, got {r0}")
    if r0 <= 1:
        return 0.0
    return _positive_root(lambda z: -math.expm1(-r0 * z) - z)


def final_size_vaccinated(r0: float, v: float) -> float:
    """Attack fraction among the unvaccinated when a fraction v is perfectly protected.

    Multiply by (1 - v) for the community fraction.
    """
    if not 0 <= v <= 1:
        raise ModelDefinitionError(f"coverage must lie in [0, 1], got {v}")
    if v == 1:
        return 0.0
    return final_size_root(r0 * (1.0 - v))


def final_size_with_policy(r0: float, policy: VaccinationPolicy) -> PolicyFinalSize:
    """Attack fractions under a leaky or all-or-nothing vaccine.

    The community fraction tau solves
    leaky:          tau = (1-v)(1 - e^{-R0 tau}) + v(1 - e^{-(1-e) R0 tau})
    all-or-nothing: tau = (1 - v e)(1 - e^{-R0 tau})
    """
    if vaccinated_reproduction_number(r0, policy) <= 1:
        return PolicyFinalSize(0.0, 0.0, 0.0)
    v, e = policy.coverage, policy.susceptibility_efficacy
    if policy.scheme == "leaky":
        tau = _positive_root(lambda x: -(1 - v) * math.expm1(-r0 * x)
                             - v * math.expm1(-(1 - e) * r0 * x) - x)
        return PolicyFinalSize(
            unvaccinated=-math.expm1(-r0 * tau),
            vaccinated=-math.expm1(-(1 - e) * r0 * tau),
            community=tau,
        )
    tau = _positive_root(lambda x: -(1 - v * e) * math.expm1(-r0 * x) - x)
    unvaccinated = -math.expm1(-r0 * tau)
    return PolicyFinalSize(unvaccinated=unvaccinated, vaccinated=(1 - e) * unvaccinated, community=tau)


def clt_final_size_moments(n: int, r0: float, cv2: float, z_star: float) -> Tuple[float, float]:
    """Mean and standard deviation of the final size of a major outbreak."""
    if r0 <= 1:
        raise ModelDefinitionError("Gaussian final-size moments need R0 > 1")
    escaped = 1.0 - z_star
    variance = z_star * escaped * (1.0 + cv2 * escaped * r0 ** 2) / (1.0 - escaped * r0) ** 2
    return n * z_star, math.sqrt(n * variance)


def subcritical_check(r0: float, z_star: float) -> float:
    """R0 (1 - z_star): the reproduction number left at the end, below 1."""
    if r0 <= 1:
        raise ModelDefinitionError("subcritical check needs R0 > 1")
    return r0 * (1.0 - z_star)


def outbreak_asymptotics(params: EpidemicParams) -> OutbreakAsymptotics:
    r0 = basic_reproduction_number(params)
    z_star = final_size_root(r0)
    q = extinction_probability(OffspringLaw.from_params(params))
    minor = q ** params.initial_infectives
    if r0 <= 1:
        return OutbreakAsymptotics(z_star=0.0, minor_prob=minor, clt_mean=0.0, clt_sd=0.0)
    mean, sd = clt_final_size_moments(params.population, r0, params.infectious.cv2, z_star)
    return OutbreakAsymptotics(z_star=z_star, minor_prob=minor, clt_mean=mean, clt_sd=sd)
