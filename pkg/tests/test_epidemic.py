"""
Epidemic parameters, vaccination policies and scalar summaries.
"""
import pytest

from app.epidemic import (
    EpidemicParams, VaccinationPolicy, basic_reproduction_number, critical_vaccination_coverage,
    escape_probability, vaccinated_reproduction_number,
)
from app.errors import ModelDefinitionError, UnsupportedCombinationError
from app.periods import PeriodDistribution


def test_r0_and_escape_probability(markov_sir):
    params = markov_sir(1.8, 100)
    assert basic_reproduction_number(params) == pytest.approx(1.8)
    assert escape_probability(params) == pytest.approx(0.9823, abs=1e-4)


def test_markovian_detection(markov_sir, reed_frost):
    assert markov_sir(1.5, 10).is_markovian
    assert not reed_frost(1.5, 10).is_markovian
    seir = EpidemicParams(1.5, PeriodDistribution.exponential(1.0), 10,
                          latent=PeriodDistribution.exponential(2.0))
    assert seir.is_markovian


def test_invalid_parameters():
    with pytest.raises(ModelDefinitionError):
        EpidemicParams(0.0, PeriodDistribution.exponential(1.0), 10)
    with pytest.raises(ModelDefinitionError):
        EpidemicParams(1.0, PeriodDistribution.exponential(1.0), 0)
    with pytest.raises(ModelDefinitionError):
        EpidemicParams(1.0, PeriodDistribution.constant(0.0), 10)
    with pytest.raises(ModelDefinitionError):
        VaccinationPolicy(coverage=1.2)
    with pytest.raises(ModelDefinitionError):
        VaccinationPolicy(coverage=0.5, scheme="partial")


def test_vaccinated_reproduction_number():
    assert vaccinated_reproduction_number(2.0, VaccinationPolicy(1 / 3)) == pytest.approx(4 / 3)
    leaky = VaccinationPolicy(1 / 3, susceptibility_efficacy=0.8)
    assert vaccinated_reproduction_number(2.0, leaky) == pytest.approx(1.4667, abs=1e-4)
    all_or_nothing = VaccinationPolicy(1 / 3, susceptibility_efficacy=0.8, scheme="all_or_nothing")
    assert vaccinated_reproduction_number(2.0, all_or_nothing) == pytest.approx(1.4667, abs=1e-4)


def test_infectivity_efficacy_is_not_supported():
    with pytest.raises(UnsupportedCombinationError):
        vaccinated_reproduction_number(2.0, VaccinationPolicy(0.5, infectivity_efficacy=0.3))


def test_critical_coverage():
    assert critical_vaccination_coverage(2.0) == pytest.approx(0.5)
    assert critical_vaccination_coverage(0.8) == 0.0
