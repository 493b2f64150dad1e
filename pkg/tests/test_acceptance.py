"""Acceptance criteria, each run at its stated tolerance and time budget.

Every test prints one ``[PASS]`` / ``[FAIL]`` line (visible with ``-s`` or in
the ``-v`` report) before asserting.
"""
from __future__ import annotations

import time

import numpy as np
import pytest

from commuter_sir import (EpidemicParams, MobilityParams, Monotonicity, PopulationSplit, Scenario,
                          build_next_generation, classify_monotonicity, epidemic_threshold,
                          minimize_threshold, outbreak_verdict, reduced_coefficients,
                          run_sweep, spectral_radius, threshold_explicit, threshold_via_alpha)
from commuter_sir.ngm import dominant_growth_rate
from commuter_sir.simulate import simulate_seeded
from commuter_sir.threshold_analysis import approx_threshold_grid

from conftest import make_case, random_scenario

SEED = 1_000_003


def verdict(capsys, number: int, title: str, passed: bool, detail: str):
    with capsys.disabled():
        print(f"\n[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} ({detail})")
    assert passed, detail


@pytest.fixture(scope="module")
def suite():
    """The 1,000 randomized scenarios shared by criteria 1, 4 and 5."""
    rng = np.random.default_rng(SEED)
    return [random_scenario(rng) for _ in range(1000)]


def test_criterion_1_formula_matches_spectral_radius(capsys, suite):
    start = time.perf_counter()
    worst = 0.0
    for sc in suite:
        explicit = threshold_explicit(reduced_coefficients(sc))
        rho = spectral_radius(build_next_generation(sc).M)
        worst = max(worst, abs(explicit - rho))
    elapsed = time.perf_counter() - start
    verdict(capsys, 1, "explicit threshold vs spectral radius of F V^-1",
            worst <= 1e-9 and elapsed < 5.0,
            f"max |diff| = {worst:.2e} <= 1e-9 over {len(suite)} scenarios, {elapsed:.2f} s < 5 s")


@pytest.mark.parametrize("case, expected", [("A", 1.9e-3), ("B", 1.4e-4), ("C", 6e-4)])
def test_criterion_2_approximation_gap(capsys, case, expected):
    start = time.perf_counter()
    gap = run_sweep(make_case(case), 201, 201).max_gap
    elapsed = time.perf_counter() - start
    verdict(capsys, 2, f"max grid gap, case {case}",
            abs(gap - expected) <= 2e-4 and elapsed < 10.0,
            f"gap = {gap:.4e}, reference {expected:.1e}, |diff| = {abs(gap - expected):.2e} "
            f"<= 2e-4, {elapsed:.2f} s < 10 s")


def test_criterion_3_equal_transmission_collapse(capsys):
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    for _ in range(200):
        sc = random_scenario(rng, equal_beta=True)
        worst = max(worst, abs(epidemic_threshold(sc) - sc.epidemic.beta1 / sc.epidemic.gamma))
    verdict(capsys, 3, "beta1 = beta2 collapses to beta/gamma", worst <= 1e-12,
            f"max |R12 - beta/gamma| = {worst:.2e} <= 1e-12 over 200 configurations")


def test_criterion_4_sandwich(capsys, suite):
    worst = 0.0
    for sc in suite:
        r = epidemic_threshold(sc)
        lo, hi = min(sc.R1, sc.R2), max(sc.R1, sc.R2)
        worst = max(worst, lo - r, r - hi)
    verdict(capsys, 4, "min(R1,R2) <= R12 <= max(R1,R2)", worst <= 1e-12,
            f"largest excursion outside the bounds = {max(worst, 0.0):.2e} <= 1e-12")


def test_criterion_5_alpha_path(capsys, suite):
    worst, count, alpha_ok = 0.0, 0, True
    for sc in suite:
        if not sc.R2 > sc.R1:
            continue
        count += 1
        q = reduced_coefficients(sc)
        r, alpha = threshold_via_alpha(q, sc.R1, sc.R2)
        worst = max(worst, abs(r - threshold_explicit(q)))
        alpha_ok &= 0.0 <= alpha < 1.0
    verdict(capsys, 5, "alpha path equals the explicit threshold", worst <= 1e-12 and alpha_ok,
            f"max |diff| = {worst:.2e} <= 1e-12, alpha in [0,1): {alpha_ok}, {count} scenarios")


def test_criterion_6_trichotomy_and_minimizers(capsys):
    start = time.perf_counter()
    kinds = {c: classify_monotonicity(make_case(c), n2c=1.0).kind for c in "ABC"}
    best = {c: minimize_threshold(make_case(c)) for c in "ABC"}
    elapsed = time.perf_counter() - start
    ok = (kinds == {"A": Monotonicity.INCREASING, "B": Monotonicity.DECREASING,
                    "C": Monotonicity.UNIMODAL}
          and (best["A"].p1_star, best["A"].p2_star) == (1.0, 0.0)
          and (best["B"].p1_star, best["B"].p2_star) == (0.0, 0.0)
          and 0.0 < best["C"].p1_star < 1.0 and best["C"].p2_star == 0.0
          and elapsed < 2.0)
    shapes = ", ".join(f"{c}: {kinds[c].value}" for c in "ABC")
    points = ", ".join(f"{c}: ({best[c].p1_star:.4g}, {best[c].p2_star:.4g})" for c in "ABC")
    verdict(capsys, 6, "shape in N1c and minimizer per reference case", ok,
            f"{shapes}; (p1*, p2*) {points}; {elapsed:.2f} s < 2 s")


def test_criterion_7_monotone_in_n2c(capsys):
    rng = np.random.default_rng(SEED + 7)
    worst, count = -np.inf, 0
    while count < 100:
        sc = random_scenario(rng)
        if sc.R1 > sc.R2:
            sc = sc.swapped()
        if not sc.R2 > sc.R1:
            continue
        count += 1
        N1, N2 = sc.population.N1, sc.population.N2
        n2c = np.arange(0, 10_001) * (1e-4 * N2)
        values = approx_threshold_grid(sc, float(rng.uniform(0, N1)), n2c)
        worst = max(worst, float(np.diff(values).max()))
    verdict(capsys, 7, "approximate threshold non-increasing in N2c", worst <= 1e-10,
            f"largest forward difference = {worst:.2e} <= 1e-10 over {count} scenarios")


def _verdict_scenarios(rng, n):
    def rate():
        return float(np.exp(rng.uniform(np.log(1e-2), np.log(1e2))))

    out = []
    while len(out) < n:
        g = float(rng.uniform(0.05, 1.0))
        sc = Scenario(EpidemicParams(g * float(rng.uniform(0.5, 2.0)),
                                     g * float(rng.uniform(0.5, 2.0)), g),
                      MobilityParams(rate(), rate(), rate(), rate()),
                      PopulationSplit(*(float(v) for v in rng.uniform(0.05, 1.0, 4))))
        if abs(epidemic_threshold(sc) - 1.0) > 0.02:
            out.append(sc)
    return out


def test_criterion_8_simulation_agrees_with_threshold(capsys):
    scenarios = _verdict_scenarios(np.random.default_rng(SEED + 8), 20)
    start = time.perf_counter()
    mismatches, worst_rate, growing = 0, 0.0, 0
    for sc in scenarios:
        r12 = epidemic_threshold(sc)
        v = outbreak_verdict(sc)
        mismatches += v.grows != (r12 > 1.0)
        if v.grows:
            growing += 1
            s = dominant_growth_rate(sc)
            worst_rate = max(worst_rate, abs(v.initial_growth_rate - s) / s)
    elapsed = time.perf_counter() - start
    verdict(capsys, 8, "outbreak verdict vs R12 > 1",
            mismatches == 0 and worst_rate <= 0.10 and elapsed < 60.0,
            f"{mismatches} mismatches in 20, worst rate error {100 * worst_rate:.1f}% <= 10% "
            f"over {growing} growing, {elapsed:.1f} s < 60 s")


def test_criterion_9_conservation(capsys):
    rng = np.random.default_rng(SEED + 9)
    scenarios = [make_case(c, 0.5, 0.5) for c in "ABC"]
    scenarios += [sc for sc in _verdict_scenarios(rng, 3)]
    worst = 0.0
    for sc in scenarios:
        traj = simulate_seeded(sc, 1e-3, t_end=500.0 / sc.epidemic.gamma)
        drift = np.abs(traj.home_totals - sc.home_totals).max() / sc.home_totals.sum()
        worst = max(worst, float(drift))
    verdict(capsys, 9, "home-group totals conserved to t = 500/gamma", worst < 1e-8,
            f"max relative drift = {worst:.2e} < 1e-8 over {len(scenarios)} trajectories")
