from __future__ import annotations

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from commuter_sir import (ConvergenceError, EpidemicParams, StateVector, ValidationError,
                          epidemic_threshold, integrate, outbreak_verdict)
from commuter_sir.model import make_rhs
from commuter_sir.ngm import dominant_growth_rate
from commuter_sir.simulate import _dopri, simulate_seeded

from conftest import REFERENCE_EPIDEMIC, make_case


def test_disease_free_state_stays_put(case):
    sc = make_case(case, 0.3, 0.6)
    traj = integrate(sc, StateVector.disease_free(sc), t_end=50.0)
    assert np.abs(traj.y - traj.y[0]).max() < 1e-13


def test_unbalanced_commuters_relax_exponentially():
    sc = make_case("A", 0.5, 0.5)
    sizes = sc.group_sizes.copy()
    # every commuter of patch 1 starts at home
    sizes[1], sizes[2] = sc.population.N1c, 0.0
    traj = integrate(sc, StateVector(sizes, np.zeros(6), np.zeros(6)), t_end=0.3,
                     rel_tol=1e-11, abs_tol=1e-13, balanced=False)
    n11_bar = sc.equilibrium.N11
    expected = n11_bar + (sc.population.N1c - n11_bar) * np.exp(-20.0 * traj.times)
    assert np.abs(traj.S[:, 1] - expected).max() < 1e-11


def test_unbalanced_start_needs_opt_in():
    sc = make_case("A")
    sizes = sc.group_sizes.copy()
    sizes[1], sizes[2] = sc.population.N1c, 0.0
    with pytest.raises(ValidationError, match="balanced"):
        integrate(sc, StateVector(sizes, np.zeros(6), np.zeros(6)), t_end=1.0)


def test_home_totals_must_match():
    sc = make_case("A")
    with pytest.raises(ValidationError, match="home-group"):
        integrate(sc, StateVector(2 * sc.group_sizes, np.zeros(6), np.zeros(6)), t_end=1.0)


def test_output_resolution_floor():
    sc = make_case("A")
    with pytest.raises(ValidationError):
        integrate(sc, StateVector.disease_free(sc), t_end=1.0, n_out=50)


def test_subthreshold_optimum_dies_out():
    sc = make_case("A", 1.0, 0.0)
    assert epidemic_threshold(sc) < 1
    I = np.zeros(6)
    I[[4, 5]] = 1e-6 * sc.group_sizes[[4, 5]]
    traj = integrate(sc, StateVector(sc.group_sizes - I, I, np.zeros(6)), t_end=200.0)
    total = traj.total_infected
    settle = traj.times >= 10.0
    assert np.all(np.diff(total[settle]) <= 0)
    # decay at roughly gamma (1 - R12) = 0.027 per unit time
    assert total[-1] < 1e-2 * total[0]


def test_matches_reference_integrator():
    sc = make_case("C", 0.2, 0.1)
    sc = type(sc)(EpidemicParams(0.9, 1.2, 0.3), sc.mobility, sc.population)
    y0 = StateVector.seeded(sc, 1e-3)
    traj = integrate(sc, y0, t_end=60.0, rel_tol=1e-10, abs_tol=1e-13)
    ref = solve_ivp(make_rhs(sc), (0.0, 60.0), y0.as_array(), method="DOP853",
                    t_eval=traj.times, rtol=1e-12, atol=1e-15)
    assert ref.success
    assert np.abs(traj.y - ref.y.T).max() < 1e-7


def test_susceptibles_of_each_home_group_never_increase():
    sc = type(make_case("A"))(EpidemicParams(0.6, 0.66, 0.3), make_case("A").mobility,
                              make_case("A").population)
    traj = simulate_seeded(sc, 1e-4, t_end=500 / 0.3)
    S = traj.S
    home = np.stack([S[:, 0], S[:, 1] + S[:, 2], S[:, 3], S[:, 4] + S[:, 5]], axis=1)
    assert np.diff(home, axis=0).max() <= 1e-12
    assert traj.y.min() >= -1e-10


def test_conservation_over_long_horizon(case):
    sc = make_case(case, 0.4, 0.2)
    traj = simulate_seeded(sc, 1e-3, t_end=500 / sc.epidemic.gamma)
    drift = np.abs(traj.home_totals - sc.home_totals).max() / sc.home_totals.sum()
    assert drift < 1e-8


def test_trajectory_accessors():
    sc = make_case("B")
    traj = simulate_seeded(sc, 1e-3, t_end=10.0)
    assert len(traj) == 201
    assert np.allclose(traj.presence_totals.sum(axis=1), 2.0)
    assert traj.state(0).I == pytest.approx(1e-3 * sc.group_sizes)
    assert len(traj.states) == 201


def test_integrator_refuses_deep_negatives():
    with pytest.raises(ConvergenceError, match="below"):
        _dopri(lambda t, y: -np.ones_like(y), 0.0, np.ones(2), np.linspace(0, 3, 5), 1e-8, 1e-10)


def test_integrator_reports_blow_up():
    with pytest.raises(ConvergenceError):
        _dopri(lambda t, y: y * y, 0.0, np.ones(1), np.array([0.5, 2.0]), 1e-8, 1e-10)


def test_integrator_exponential_accuracy():
    t = np.linspace(0, 5, 11)
    y = _dopri(lambda t, y: -y, 0.0, np.ones(1), t, 1e-10, 1e-14)
    assert np.abs(y[:, 0] - np.exp(-t)).max() < 1e-9


# ---------------------------------------------------------------------------
# outbreak verdicts

def test_verdict_subcritical():
    v = outbreak_verdict(make_case("A", 1.0, 0.0))
    assert not v.grows and v.initial_growth_rate < 0


def test_verdict_supercritical_rate():
    sc = make_case("B", 0.0, 0.0)
    assert epidemic_threshold(sc) > 1
    v = outbreak_verdict(sc)
    assert v.grows
    assert v.initial_growth_rate == pytest.approx(dominant_growth_rate(sc), rel=0.1)


def test_verdict_equal_subcritical_patches():
    sc = make_case("C")
    sc = type(sc)(EpidemicParams(0.27, 0.27, 0.3), sc.mobility, sc.population)
    v = outbreak_verdict(sc)
    assert not v.grows
    assert v.initial_growth_rate == pytest.approx(-0.03, rel=0.1)


def test_verdict_rejects_large_seed():
    with pytest.raises(ValidationError):
        outbreak_verdict(make_case("A"), seed_fraction=0.1)
