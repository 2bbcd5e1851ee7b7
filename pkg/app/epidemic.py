"""
Seirkit Epidemic Parameters

The closed-population SEIR parameter set, vaccination policies and the
scalar summaries every other module consumes.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Literal

from .errors import ModelDefinitionError, UnsupportedCombinationError
from .periods import PeriodDistribution

logger = logging.getLogger(__name__)

VaccineScheme = Literal["leaky", "all_or_nothing"]


@dataclass(frozen=True)
class EpidemicParams:
    """Contact rate, period laws and community size of a stochastic SEIR epidemic.

    ``population`` counts the initial susceptibles; the index cases come on top.
    """

    contact_rate: float
    infectious: PeriodDistribution
    population: int
    latent: PeriodDistribution = field(default_factory=lambda: PeriodDistribution.constant(0.0))
    initial_infectives: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.contact_rate) and self.contact_rate > 0):
            raise ModelDefinitionError(f"contact rate must be > 0, got {self.contact_rate}")
        if self.population < 1:
            raise ModelDefinitionError(f"population must be >= 1, got {self.population}")
        if self.initial_infectives < 1:
            raise ModelDefinitionError("at least one initial infective is required")
        if self.infectious.mean <= 0:
            raise ModelDefinitionError("infectious period must have positive mean")

    @property
    def pair_rate(self) -> float:
        """lambda / N, the contact rate towards one given individual."""
        return self.contact_rate / self.population

    @property
    def is_markovian(self) -> bool:
        latent_ok = self.latent.kind == "exponential" or self.latent.is_degenerate
        return latent_ok and self.infectious.kind == "exponential"


@dataclass(frozen=True)
class VaccinationPolicy:
    """A fraction ``coverage`` vaccinated before the outbreak.

    Under the leaky scheme each vaccinee has susceptibility reduced by
    ``susceptibility_efficacy``; under all-or-nothing that fraction of
    vaccinees is fully protected and the rest are unaffected. Efficacy 1 is
    the perfect vaccine under either scheme.
    """

    coverage: float
    susceptibility_efficacy: float = 1.0
    infectivity_efficacy: float = 0.0
    scheme: VaccineScheme = "leaky"

    def __post_init__(self):
        for name in ("coverage", "susceptibility_efficacy", "infectivity_efficacy"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ModelDefinitionError(f"{name} must lie in [0, 1], got {value}")
        if self.scheme not in ("leaky", "all_or_nothing"):
            raise ModelDefinitionError(f"unknown vaccine scheme {self.scheme!r}")

    @property
    def is_perfect(self) -> bool:
        return self.susceptibility_efficacy == 1.0 and self.infectivity_efficacy == 0.0


# =============================================================================
# Summaries
# =============================================================================

def basic_reproduction_number(params: EpidemicParams) -> float:
    """R0 = lambda * E[I]."""
    return params.contact_rate * params.infectious.mean


def escape_probability(params: EpidemicParams) -> float:
    """Probability a given susceptible escapes one infective: psi_I(-lambda/N)."""
    return params.infectious.mgf(-params.pair_rate)


def vaccinated_reproduction_number(r0: float, policy: VaccinationPolicy) -> float:
    """Reproduction number in a community vaccinated according to ``policy``.

    Both schemes scale R0 by 1 - v * e_s. A nonzero infectivity efficacy is
    rejected: no threshold formula is available for the combined case.
    """
    if r0 <= 0:
        raise ModelDefinitionError(f"R0 must be > 0, got {r0}")
    if policy.infectivity_efficacy > 0 and policy.coverage > 0:
        raise UnsupportedCombinationError(
            "infectivity efficacy is not supported; set infectivity_efficacy to 0"
        )
    v, e = policy.coverage, policy.susceptibility_efficacy
    return r0 * ((1.0 - e) * v + (1.0 - v))


def critical_vaccination_coverage(r0: float) -> float:
    """v_c = 1 - 1/R0; zero when the community is already subcritical."""
    if r0 <= 1:
        logger.info("R0=%g <= 1: already subcritical, no vaccination needed", r0)
        return 0.0
    return 1.0 - 1.0 / r0
