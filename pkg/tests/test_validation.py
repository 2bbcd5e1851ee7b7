"""
Validation suites and the statistics behind them. The acceptance-scale
runs are marked slow.
"""
import numpy as np
import pytest
from scipy import stats

from app.catalogue import model_catalogue
from app.deterministic import OdePath
from app.epidemic import EpidemicParams
from app.errors import ModelDefinitionError, UnsupportedCombinationError
from app.final_size import final_size_root
from app.periods import PeriodDistribution
from app.simulation import Trajectory
from app.validation import (
    chi_square_goodness_of_fit, clt_suite, duration_suite, final_size_draws, first_crossing_time,
    ldp_slope_suite, lln_suite, major_outbreak_cut, mc_vs_exact_suite, ou_variance_suite,
    sellke_vs_agent_suite, sup_distance, two_sample_chi_square, wald_suite,
)


def small_trajectory():
    return Trajectory(
        times=np.array([0.0, 1.0]),
        states=np.array([[10, 0], [5, 5]]),
        jump_ids=np.array([0]),
        compartments=("s", "i"),
        jumps=np.array([[-5, 5]]),
    )


def test_goodness_of_fit():
    probs = stats.binom(10, 0.3).pmf(np.arange(11))
    sample = np.random.default_rng(3).binomial(10, 0.3, 5000)
    _, p_value, dof = chi_square_goodness_of_fit(sample, probs)
    assert p_value > 1e-3
    assert dof >= 5
    _, p_value, _ = chi_square_goodness_of_fit(np.zeros(500, dtype=int), probs)
    assert p_value < 1e-3


def test_two_sample_chi_square():
    sample = np.random.default_rng(4).binomial(10, 0.3, 2000)
    statistic, p_value, _ = two_sample_chi_square(sample, sample)
    assert statistic == pytest.approx(0.0)
    assert p_value == pytest.approx(1.0)
    _, p_value, _ = two_sample_chi_square(sample, sample + 2)
    assert p_value < 1e-3


def test_crossing_and_distance():
    trajectory = small_trajectory()
    assert first_crossing_time(trajectory, "i", 5) == 1.0
    assert first_crossing_time(trajectory, "i", 6) is None
    path = OdePath(grid=np.array([0.0, 0.5, 1.0, 1.5]),
                   values=np.array([[1.0, 0.0], [1.0, 0.0], [0.5, 0.5], [0.4, 0.6]]),
                   system="SIR", compartments=("s", "i"))
    assert sup_distance(trajectory, path, 10) == pytest.approx(0.1)
    assert sup_distance(trajectory, path, 10, offset=0.5) == pytest.approx(0.5)


def test_wald_suite(markov_sir):
    report = wald_suite(markov_sir(1.5, 20), 20_000, 42, thetas=(0.5, 1.0, 2.0), parallelism=1)
    assert report.passed
    assert set(report.statistics) == {"0.5", "1", "2"}


def test_wald_suite_is_exact_for_unit_periods(reed_frost):
    report = wald_suite(reed_frost(2.0, 20), 1000, 1, parallelism=1)
    assert report.passed
    assert report.statistics["1"]["mean"] == pytest.approx(1.0, abs=1e-12)


PERIODS = {
    "constant": PeriodDistribution.constant(1.0),
    "exponential": PeriodDistribution.exponential(1.0),
    "gamma": PeriodDistribution.gamma(3, 1.0 / 3.0),
}


def test_mc_vs_exact_suite(reed_frost):
    report = mc_vs_exact_suite(reed_frost(2.0, 10), 5000, 7, parallelism=1)
    assert report.passed
    assert report.statistics["method"] == "shortcut"
    assert report.statistics["sample_mean"] == pytest.approx(report.statistics["exact_mean"], abs=0.3)


@pytest.mark.parametrize("method", ["sellke", "agent"])
@pytest.mark.parametrize("period", sorted(PERIODS))
@pytest.mark.parametrize("population", [3, 10, 25])
def test_simulated_final_sizes_follow_the_exact_law(population, period, method):
    params = EpidemicParams(2.0, PERIODS[period], population)
    report = mc_vs_exact_suite(params, 2000, 100 + population, parallelism=1, method=method)
    assert report.passed
    assert report.statistics["method"] == method


def test_final_size_draws_reject_unknown_samplers(reed_frost):
    with pytest.raises(UnsupportedCombinationError):
        final_size_draws(reed_frost(2.0, 10), 10, 0, method="markov", parallelism=1)


@pytest.mark.parametrize("period", sorted(PERIODS))
@pytest.mark.parametrize("population", [3, 10, 25])
def test_sellke_vs_agent_suite(population, period):
    params = EpidemicParams(1.5, PERIODS[period], population)
    report = sellke_vs_agent_suite(params, 1000, 11, parallelism=1)
    assert report.passed
    assert report.replicas == 1000 and report.master_seed == 11


@pytest.mark.parametrize("method", ["sellke", "agent"])
def test_wald_suite_on_full_simulations(markov_sir, method):
    report = wald_suite(markov_sir(1.5, 20), 20_000, 42, thetas=(0.5, 1.0, 2.0), parallelism=1,
                        method=method)
    assert report.passed
    assert all(entry["passed"] for entry in report.statistics.values())


def test_wald_suite_with_gamma_periods_through_the_agent_simulator():
    params = EpidemicParams(1.5, PERIODS["gamma"], 20)
    report = wald_suite(params, 10_000, 5, thetas=(0.5, 1.0, 2.0), parallelism=1, method="agent")
    assert report.passed


def test_lln_suite_small_population():
    model = model_catalogue("SIR", {"lambda": 2.0, "gamma": 1.0})
    report = lln_suite(model, 5000, [5000, 10, 0], 20.0, 0.05, 3, 5, tolerance=0.1)
    assert report.passed
    assert report.statistics["taken_off"] >= 1


def test_clt_suite_reports_predictions(markov_sir):
    report = clt_suite(markov_sir(1.5, 1000), 500, 3, parallelism=1)
    assert report.statistics["predicted_mean"] == pytest.approx(582.8, abs=0.1)
    assert report.statistics["predicted_sd"] == pytest.approx(58.0, abs=0.05)
    with pytest.raises(UnsupportedCombinationError):
        clt_suite(markov_sir(0.8, 1000), 10, 3, parallelism=1)


def test_major_outbreak_cut_sits_at_half_the_deterministic_size():
    z_star = final_size_root(1.5)
    assert major_outbreak_cut(1000, z_star) == 292
    assert major_outbreak_cut(100, 0.05) == 20


def test_clt_suite_judges_mean_and_sd(reed_frost):
    report = clt_suite(reed_frost(1.5, 1000), 4000, 17, parallelism=1,
                       mean_tolerance=0.02, sd_tolerance=0.15)
    assert report.passed
    assert report.statistics["cut"] == 292
    assert report.statistics["predicted_sd"] == pytest.approx(41.7, abs=0.05)
    assert report.statistics["mean_error"] <= 0.02
    assert report.statistics["sd_error"] <= 0.15
    strict = clt_suite(reed_frost(1.5, 1000), 4000, 17, parallelism=1, mean_tolerance=1e-9)
    assert not strict.passed
    assert strict.p_value == pytest.approx(report.p_value)


def test_ou_variance_suite_small_population():
    report = ou_variance_suite("SIR", {"lambda": 1.5, "gamma": 1.0}, 2000, [1800, 200, 0],
                               (0.5,), 400, 9, tolerance=0.3, step=0.01, parallelism=1)
    assert report.suite == "ou-variance"
    assert report.passed
    assert report.statistics["0.5"]["predicted"] > 0


def test_ou_variance_suite_needs_positive_checkpoints():
    with pytest.raises(ModelDefinitionError):
        ou_variance_suite("SIR", {"lambda": 1.5, "gamma": 1.0}, 100, [90, 10, 0], (0.0,), 10, 0)



def test_duration_suite_needs_exponential_periods(reed_frost):
    with pytest.raises(UnsupportedCombinationError):
        duration_suite(reed_frost(1.5, 100), 10, 0, parallelism=1)


@pytest.mark.slow
def test_ldp_slope_suite():
    report = ldp_slope_suite(2.0, 1.0, 500, 4, parallelism=1)
    assert report.passed


@pytest.mark.slow
def test_duration_suite():
    params = EpidemicParams(1.5, PeriodDistribution.exponential(1.0), 1000, initial_infectives=1)
    report = duration_suite(params, 200, 6, parallelism=1)
    assert report.statistics["predicted"] == pytest.approx(4.672, abs=1e-3)
    assert report.passed


@pytest.mark.slow
def test_lln_suite_acceptance():
    model = model_catalogue("SIR", {"lambda": 2.0, "gamma": 1.0})
    report = lln_suite(model, 100_000, [100_000, 10, 0], 20.0, 0.05, 100, 1, tolerance=0.01)
    assert report.statistics["taken_off"] >= 50
    assert report.passed


@pytest.mark.slow
def test_lln_suite_ross_malaria():
    model = model_catalogue("Ross-malaria", {"a": 0.3, "p_vh": 0.5, "p_hv": 0.5, "m": 2.0,
                                             "gamma": 0.05, "mu": 0.1})
    report = lln_suite(model, 100_000, [1000, 0], 30.0, 0.01, 100, 3, tolerance=0.01, step=0.05,
                       parallelism=4)
    assert report.statistics["taken_off"] == 100
    assert report.passed


@pytest.mark.slow
def test_clt_suite_acceptance(reed_frost):
    report = clt_suite(reed_frost(1.5, 1000), 100_000, 2024)
    assert report.statistics["mean_error"] <= 0.01
    assert report.statistics["sd_error"] <= 0.05
    assert report.passed


@pytest.mark.slow
def test_ou_variance_suite_acceptance():
    report = ou_variance_suite("SIR", {"lambda": 1.5, "gamma": 1.0}, 10_000, [9000, 1000, 0],
                               (0.5, 1.0), 10_000, 21, tolerance=0.05, step=0.005)
    assert report.passed
