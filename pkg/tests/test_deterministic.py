"""
Deterministic limits: RK4 paths, endemic states, critical community sizes, Ross malaria.
"""
import math

import numpy as np
import pytest

from app.catalogue import model_catalogue, sir_demography_parameters
from app.deterministic import (
    critical_community_size, endemic_equilibrium, epidemic_start, integrate, ross_malaria_equilibrium,
    ross_malaria_path, uniform_grid,
)
from app.errors import ModelDefinitionError, NoEndemicStateError, RegionViolationError
from app.final_size import final_size_root

ROSS = dict(a=0.3, p_vh=0.5, p_hv=0.5, m=2.0, gamma=0.05, mu=0.1)


def sir(lam=1.5, gamma=1.0):
    return model_catalogue("SIR", {"lambda": lam, "gamma": gamma})


def test_uniform_grid():
    grid = uniform_grid(1.0, 0.25)
    assert grid.tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
    with pytest.raises(ModelDefinitionError):
        uniform_grid(0.0, 0.1)


def test_disease_free_state_is_fixed():
    path = integrate(sir(), [1.0, 0.0, 0.0], 10.0, 0.1)
    assert np.allclose(path.values, [1.0, 0.0, 0.0])


def test_sir_mass_is_conserved_and_susceptibles_fall():
    path = integrate(sir(), epidemic_start(sir(), 0.01), 30.0, 0.01)
    assert np.allclose(path.values.sum(axis=1), 1.0, atol=1e-9)
    assert np.all(np.diff(path.column("s")) <= 1e-15)


def test_sir_reaches_the_final_size():
    model = sir()
    path = integrate(model, epidemic_start(model, 1e-4), 150.0, 0.01)
    assert path.column("s")[-1] == pytest.approx(1 - final_size_root(1.5), abs=5e-4)


def test_latency_does_not_change_the_final_size():
    seir = model_catalogue("SEIR", {"lambda": 1.5, "nu": 1.0, "gamma": 1.0})
    seir_path = integrate(seir, epidemic_start(seir, 1e-4), 250.0, 0.02)
    sir_path = integrate(sir(), epidemic_start(sir(), 1e-4), 250.0, 0.02)
    assert seir_path.column("s")[-1] == pytest.approx(sir_path.column("s")[-1], abs=1e-5)


def test_rk4_is_fourth_order():
    model = sir()
    init = [0.9, 0.1, 0.0]
    reference = integrate(model, init, 10.0, 0.2 / 16).final
    coarse = np.abs(integrate(model, init, 10.0, 0.2).final - reference).max()
    fine = np.abs(integrate(model, init, 10.0, 0.1).final - reference).max()
    assert 8 <= coarse / fine <= 32


def test_large_steps_leave_the_region():
    with pytest.raises(RegionViolationError):
        integrate(sir(lam=100.0), [0.5, 0.5, 0.0], 5.0, 1.0)
    with pytest.raises(RegionViolationError):
        integrate(sir(), [-0.1, 1.1, 0.0], 5.0, 0.1)


def test_path_interpolation():
    path = integrate(sir(), [0.9, 0.1, 0.0], 1.0, 0.5)
    middle = path.at([0.25])[0]
    assert middle == pytest.approx(0.5 * (path.values[0] + path.values[1]))


def test_endemic_equilibrium():
    state = endemic_equilibrium(2.0, 0.01)
    assert (state.s_hat, state.i_hat, state.r_hat) == pytest.approx((0.5, 0.005, 0.495))
    with pytest.raises(NoEndemicStateError):
        endemic_equilibrium(0.9, 0.01)


def test_sir_demography_settles_at_the_endemic_state():
    model = model_catalogue("SIR-demography", sir_demography_parameters(2.0, 0.1))
    path = integrate(model, [0.9, 0.01], 100.0, 0.01)
    state = endemic_equilibrium(2.0, 0.1)
    assert path.final == pytest.approx([state.s_hat, state.i_hat], abs=1e-6)


def test_critical_community_size_for_measles():
    eps = 1 / 3750
    n_crit = critical_community_size(15.0, eps)
    # 9 / (eps^2 R0) alone gives 8.4375e6; the (1 - 1/R0)^2 factor lifts it to 9.686e6
    assert n_crit == pytest.approx(9 * 3750 ** 2 / 15 / (1 - 1 / 15) ** 2, rel=1e-12)
    assert n_crit * (14 / 15) ** 2 == pytest.approx(8.4375e6, rel=1e-12)
    assert n_crit == pytest.approx(9.6859e6, rel=1e-5)
    assert critical_community_size(15.0, eps / 2) == pytest.approx(4 * n_crit, rel=1e-12)


def test_critical_community_size_with_vaccination():
    assert critical_community_size(2.0, 0.1, coverage=0.5) == math.inf
    assert critical_community_size(15.0, 1 / 3750, coverage=0.5) > critical_community_size(15.0, 1 / 3750)


def test_ross_equilibrium_and_convergence():
    h_star, v_star = ross_malaria_equilibrium(**ROSS)
    assert h_star == pytest.approx(8 / 10.5)
    a, p_vh, p_hv, m, gamma, mu = ROSS.values()
    assert a * p_vh * m * v_star * (1 - h_star) == pytest.approx(gamma * h_star)
    assert a * p_hv * h_star * (1 - v_star) == pytest.approx(mu * v_star)

    path = ross_malaria_path(**ROSS, init=[0.01, 0.0], horizon=300.0, step=0.1)
    assert path.compartments == ("h", "v")
    assert path.final == pytest.approx([h_star, v_star], abs=1e-6)


def test_ross_below_threshold():
    assert ross_malaria_equilibrium(**{**ROSS, "m": 0.1}) == (0.0, 0.0)
    path = ross_malaria_path(**ROSS, init=[0.0, 0.0], horizon=10.0, step=0.5)
    assert np.all(path.values == 0.0)
    with pytest.raises(ModelDefinitionError):
        ross_malaria_equilibrium(**{**ROSS, "mu": 0.0})
