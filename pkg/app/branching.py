"""
Seirkit Branching Approximation

Offspring laws of the early epidemic, extinction probabilities, Malthusian
growth and end-phase decay rates, total progeny of minor outbreaks and the
ghost-free coupling probability.
"""
import logging
import math
from dataclasses import dataclass
from typing import Literal, Optional, Tuple

import numpy as np
from scipy import optimize, stats
from scipy.special import gammaln, logsumexp

from .epidemic import (
    EpidemicParams, VaccinationPolicy, basic_reproduction_number, vaccinated_reproduction_number,
)
from .errors import ConvergenceError, ModelDefinitionError
from .periods import PeriodDistribution

logger = logging.getLogger(__name__)

OffspringKind = Literal["poisson", "geometric", "mixed_poisson"]


# =============================================================================
# Offspring laws
# =============================================================================

@dataclass(frozen=True)
class OffspringLaw:
    """Number of children of one individual.

    Geometric laws live on {0, 1, 2, ...}: P(X = k) = p (1 - p)^k.
    Mixed Poisson laws are Poisson with random mean ``contact_rate * I``.
    """

    kind: OffspringKind
    poisson_mean: float = 0.0
    success_prob: float = 0.0
    contact_rate: float = 0.0
    period: Optional[PeriodDistribution] = None

    def __post_init__(self):
        if self.kind == "poisson" and not self.poisson_mean >= 0:
            raise ModelDefinitionError("Poisson mean must be >= 0")
        if self.kind == "geometric" and not 0 < self.success_prob <= 1:
            raise ModelDefinitionError("geometric success probability must lie in (0, 1]")
        if self.kind == "mixed_poisson" and (self.period is None or self.contact_rate < 0):
            raise ModelDefinitionError("mixed Poisson law needs a period and a contact rate >= 0")

    @classmethod
    def poisson(cls, mean: float) -> "OffspringLaw":
        return cls(kind="poisson", poisson_mean=mean)

    @classmethod
    def geometric(cls, success_prob: float) -> "OffspringLaw":
        return cls(kind="geometric", success_prob=success_prob)

    @classmethod
    def mixed_poisson(cls, contact_rate: float, period: PeriodDistribution) -> "OffspringLaw":
        return cls(kind="mixed_poisson", contact_rate=contact_rate, period=period)

    @classmethod
    def from_params(cls, params: EpidemicParams) -> "OffspringLaw":
        return cls.mixed_poisson(params.contact_rate, params.infectious)

    def reduced(self) -> "OffspringLaw":
        """Closed-form equivalent of a mixed Poisson law, when one exists."""
        if self.kind != "mixed_poisson":
            return self
        if self.period.kind == "constant":
            return OffspringLaw.poisson(self.contact_rate * self.period.value)
        if self.period.kind == "exponential":
            return OffspringLaw.geometric(self.period.rate / (self.period.rate + self.contact_rate))
        return self

    def distribution(self):
        """scipy.stats frozen law of X."""
        law = self.reduced()
        if law.kind == "poisson":
            return stats.poisson(law.poisson_mean)
        if law.kind == "geometric":
            return stats.nbinom(1, law.success_prob)
        # gamma-mixed Poisson is negative binomial
        return stats.nbinom(law.period.shape, 1.0 / (1.0 + law.contact_rate * law.period.scale))

    @property
    def mean(self) -> float:
        if self.kind == "poisson":
            return self.poisson_mean
        if self.kind == "geometric":
            return (1.0 - self.success_prob) / self.success_prob
        return self.contact_rate * self.period.mean

    def pgf(self, s):
        """g(s) = E[s^X] on [0, 1]."""
        s = np.asarray(s, dtype=float)
        if self.kind == "poisson":
            out = np.exp(self.poisson_mean * (s - 1.0))
        elif self.kind == "geometric":
            out = self.success_prob / (1.0 - (1.0 - self.success_prob) * s)
        else:
            out = self.period.mgf(self.contact_rate * (s - 1.0))
        return float(out) if np.ndim(out) == 0 else out


def offspring_pmf(law: OffspringLaw, k: int) -> float:
    """P(X = k)."""
    if k < 0:
        raise ModelDefinitionError(f"k must be >= 0, got {k}")
    return float(law.distribution().pmf(k))


def extinction_probability(law: OffspringLaw, tol: float = 1e-13, max_iter: int = 10_000_000) -> float:
    """Smallest root of g(q) = q by monotone iteration from 0."""
    if law.mean <= 1.0:
        return 1.0
    q = 0.0
    for iteration in range(1, max_iter + 1):
        nxt = law.pgf(q)
        if abs(nxt - q) < tol:
            logger.debug("extinction probability %.15g after %d iterations", nxt, iteration)
            return nxt
        q = nxt
    raise ConvergenceError(f"fixed-point iteration did not settle within {max_iter} steps")


def takeoff_probability(params: EpidemicParams, policy: Optional[VaccinationPolicy] = None) -> float:
    """Probability of a major outbreak, 1 - q^k for k index cases.

    With a policy the contact rate is scaled to the vaccinated reproduction number.
    """
    rate = params.contact_rate
    if policy is not None:
        r0 = basic_reproduction_number(params)
        rate *= vaccinated_reproduction_number(r0, policy) / r0
    q = extinction_probability(OffspringLaw.mixed_poisson(rate, params.infectious))
    return 1.0 - q ** params.initial_infectives


# =============================================================================
# Growth rates
# =============================================================================

@dataclass(frozen=True)
class GrowthRates:
    r: float
    r_star: float


def renewal_transform(
    r: float,
    contact_rate: float,
    latent: PeriodDistribution,
    infectious: PeriodDistribution,
    quadrature: bool = False,
) -> float:
    """Integral of exp(-r s) * lambda * P(L < s < L + I) ds.

    Equals lambda * E[exp(-r L)] * E[(1 - exp(-r I)) / r] for independent L, I.
    With ``quadrature`` both factors are integrated numerically instead.
    """
    if r <= -min(latent.abscissa, infectious.abscissa):
        return math.inf
    if quadrature:
        lat = latent.expect(lambda x: math.exp(-r * x))
        if r == 0:
            inf = infectious.mean
        else:
            inf = infectious.expect(lambda x: -math.expm1(-r * x) / r)
        return contact_rate * lat * inf
    return contact_rate * latent.mgf(-r) * infectious.discounted_mean(r)


def malthusian_rate(
    contact_rate: float,
    latent: PeriodDistribution,
    infectious: PeriodDistribution,
) -> float:
    """Real root r of renewal_transform(r) = 1; negative when subcritical."""
    r0 = contact_rate * infectious.mean
    if math.isclose(r0, 1.0, rel_tol=0, abs_tol=1e-15):
        return 0.0

    def excess(r: float) -> float:
        return renewal_transform(r, contact_rate, latent, infectious) - 1.0

    if r0 > 1:
        lo, hi = 0.0, 1.0
        while excess(hi) > 0:
            lo, hi = hi, 2.0 * hi
            if hi > 1e12:
                raise ConvergenceError("could not bracket the Malthusian parameter")
    else:
        lo, hi = -1.0, 0.0
        bound = min(latent.abscissa, infectious.abscissa)
        for step in range(1, 200):
            lo = -bound * (1.0 - 2.0 ** -step) if math.isfinite(bound) else -float(2 ** step)
            if excess(lo) > 0:
                break
        else:
            raise ConvergenceError("could not bracket the Malthusian parameter")
    root = optimize.brentq(excess, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    logger.debug("Malthusian parameter %.12g in [%g, %g]", root, lo, hi)
    return root


def end_phase_decay_rate(
    contact_rate: float,
    z_star: float,
    latent: PeriodDistribution,
    infectious: PeriodDistribution,
) -> float:
    """Malthusian root once a fraction z_star is immune: lambda -> lambda (1 - z_star)."""
    if contact_rate * infectious.mean <= 1:
        raise ModelDefinitionError("end-phase decay needs R0 > 1")
    if not 0 < z_star < 1:
        raise ModelDefinitionError(f"z_star must lie in (0, 1), got {z_star}")
    return malthusian_rate(contact_rate * (1.0 - z_star), latent, infectious)


def growth_rates(params: EpidemicParams) -> GrowthRates:
    from .final_size import final_size_root

    z_star = final_size_root(basic_reproduction_number(params))
    return GrowthRates(
        r=malthusian_rate(params.contact_rate, params.latent, params.infectious),
        r_star=end_phase_decay_rate(params.contact_rate, z_star, params.latent, params.infectious),
    )


def duration_leading_terms(N: float, rates: GrowthRates) -> Tuple[float, float]:
    """(log N / r, -log N / r_star): time to take off and time to die out."""
    if rates.r <= 0 or rates.r_star >= 0:
        raise ModelDefinitionError("duration terms need r > 0 and r_star < 0")
    log_n = math.log(N)
    return log_n / rates.r, -log_n / rates.r_star


# =============================================================================
# Minor outbreaks
# =============================================================================

def _log_convolve(a: np.ndarray, b: np.ndarray, size: int) -> np.ndarray:
    out = np.full(size, -np.inf)
    for n in range(size):
        out[n] = logsumexp(a[:n + 1] + b[n::-1])
    return out


def kemperman_pmf(law: OffspringLaw, k: int) -> float:
    """P(Z = k) = P(X_1 + ... + X_k = k - 1) / k by log-space convolution.

    Only offspring values up to k - 1 can contribute, so the support is
    truncated there without error.
    """
    if k < 1:
        raise ModelDefinitionError(f"total progeny counts the ancestor, k must be >= 1, got {k}")
    with np.errstate(divide="ignore"):
        base = law.distribution().logpmf(np.arange(k))
    total = np.full(k, -np.inf)
    total[0] = 0.0
    power, n = base, k
    while n:
        if n & 1:
            total = _log_convolve(total, power, k)
        n >>= 1
        if n:
            power = _log_convolve(power, power, k)
    return float(np.exp(total[k - 1] - math.log(k)))


def total_progeny_pmf(law: OffspringLaw, k: int) -> float:
    """P(total progeny = k), the ancestor included.

    Borel for Poisson offspring, the Catalan-weighted form for geometric
    offspring, Kemperman convolution otherwise.
    """
    if k < 1:
        raise ModelDefinitionError(f"total progeny counts the ancestor, k must be >= 1, got {k}")
    reduced = law.reduced()
    if reduced.kind == "poisson":
        mu = reduced.poisson_mean
        if mu == 0:
            return 1.0 if k == 1 else 0.0
        return math.exp(-mu * k + (k - 1) * math.log(mu * k) - gammaln(k + 1))
    if reduced.kind == "geometric":
        p = reduced.success_prob
        if p == 1:
            return 1.0 if k == 1 else 0.0
        log_weight = gammaln(2 * k - 1) - gammaln(k + 1) - gammaln(k)
        return math.exp(log_weight + k * math.log(p) + (k - 1) * math.log1p(-p))
    return kemperman_pmf(reduced, k)


def ghost_free_probability(N: int, k: int) -> float:
    """Product over j = 0..k of (1 - j/N): no repeat among the first contacts."""
    if k < 0:
        raise ModelDefinitionError(f"k must be >= 0, got {k}")
    if k > N:
        return 0.0
    return float(np.prod(1.0 - np.arange(k + 1) / N))
