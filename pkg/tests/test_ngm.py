from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from commuter_sir import (ConvergenceError, EpidemicParams, MobilityParams, PopulationSplit,
                          ReducedMatrix, Scenario, ValidationError, build_next_generation,
                          epidemic_threshold, reduced_coefficients, spectral_radius,
                          threshold_explicit, threshold_report, threshold_via_alpha)
from commuter_sir.ngm import alpha_threshold, dominant_growth_rate, q_coefficients

from conftest import REFERENCE_EPIDEMIC, make_case, random_scenario


def residence_times(sc):
    """Expected time (times gamma) an infective of each group spends in each patch.

    Row g is the group the infective starts in, columns are (patch 1, patch 2).
    Built from the two-state chain away/home of a commuter, not from V.
    """
    g, m = sc.epidemic.gamma, sc.mobility
    s1 = g + m.lambda1 + m.mu1
    s2 = g + m.lambda2 + m.mu2
    return np.array([
        [1.0, 0.0],                                   # 1r
        [(g + m.mu1) / s1, m.lambda1 / s1],           # 11
        [m.mu1 / s1, (g + m.lambda1) / s1],           # 12
        [0.0, 1.0],                                   # 2r
        [m.lambda2 / s2, (g + m.mu2) / s2],           # 22
        [(g + m.lambda2) / s2, m.mu2 / s2],           # 21
    ])


def oracle_M(sc):
    """M[h, g]: infections in group h caused by one infective starting in group g."""
    sizes, eq = sc.group_sizes, sc.equilibrium
    share = np.zeros((6, 2))
    share[[0, 1, 5], 0] = sizes[[0, 1, 5]] / eq.N1p
    share[[2, 3, 4], 1] = sizes[[2, 3, 4]] / eq.N2p
    R = np.array([sc.R1, sc.R2])
    return (share * R) @ residence_times(sc).T


def oracle_K(sc):
    """K[a, b]: infections acquired in patch a caused by one infection acquired in patch b."""
    M = oracle_M(sc)
    sizes, eq = sc.group_sizes, sc.equilibrium
    w1 = np.zeros(6)
    w2 = np.zeros(6)
    w1[[0, 1, 5]] = sizes[[0, 1, 5]] / eq.N1p
    w2[[2, 3, 4]] = sizes[[2, 3, 4]] / eq.N2p
    in1 = np.zeros(6)
    in1[[0, 1, 5]] = 1
    in2 = 1 - in1
    return np.array([[in1 @ M @ w1, in1 @ M @ w2], [in2 @ M @ w1, in2 @ M @ w2]])


# ---------------------------------------------------------------------------
# next-generation matrices

def test_F_structure():
    sc = make_case("B", 0.3, 0.6)
    F = build_next_generation(sc).F
    eq, sizes = sc.equilibrium, sc.group_sizes
    assert F[0, 5] == pytest.approx(0.27 * sizes[0] / eq.N1p)
    assert F[4, 2] == pytest.approx(0.33 * sizes[4] / eq.N2p)
    # nobody infects across patches within one generation event
    assert np.all(F[np.ix_([0, 1, 5], [2, 3, 4])] == 0)


def test_V_has_recovery_on_the_diagonal_and_conserves_commuters():
    sc = make_case("A")
    V = build_next_generation(sc).V
    # column sums of V are gamma: leaving a group is either recovery or a move
    assert np.allclose(V.sum(axis=0), 0.3, atol=1e-14)


@pytest.mark.parametrize("case", ["A", "B", "C"])
@pytest.mark.parametrize("p1, p2", [(0.5, 0.5), (0.1, 0.9), (0.0, 0.3), (1.0, 0.0)])
def test_M_matches_residence_time_oracle(case, p1, p2):
    sc = make_case(case, p1, p2)
    M = build_next_generation(sc).M
    assert np.allclose(M, oracle_M(sc), rtol=1e-12, atol=1e-14)


def test_M_last_column_uses_patch2_population():
    # infections a 21-commuter causes while home in patch 2 are diluted by N2p
    sc = make_case("A", 0.2, 0.5)
    M = build_next_generation(sc).M
    eq, sizes, m = sc.equilibrium, sc.group_sizes, sc.mobility
    s2 = 0.3 + m.lambda2 + m.mu2
    expected = 1.1 * sizes[3] / eq.N2p * m.mu2 / s2
    assert M[3, 5] == pytest.approx(expected, rel=1e-13)


def test_closed_patches_give_block_diagonal_M():
    sc = Scenario(EpidemicParams(**REFERENCE_EPIDEMIC), MobilityParams(1, 1, 1, 1), PopulationSplit(2, 3, 0, 0))
    ngm = build_next_generation(sc)
    assert ngm.M[0, 0] == pytest.approx(0.9) and ngm.M[3, 3] == pytest.approx(1.1)
    q = reduced_coefficients(sc)
    assert (q.q11, q.q12, q.q21, q.q22) == pytest.approx((0.9, 0.0, 0.0, 1.1))


def test_slow_commuting_limit_M_to_F_over_gamma():
    sc = Scenario(EpidemicParams(**REFERENCE_EPIDEMIC), MobilityParams(1e-12, 1e-12, 1e-12, 1e-12),
                  PopulationSplit(0.5, 0.5, 0.5, 0.5))
    ngm = build_next_generation(sc)
    assert np.allclose(ngm.M, ngm.F / 0.3, atol=1e-10)


def test_growth_rate_sign_matches_threshold(case):
    for p1 in (0.0, 0.5, 1.0):
        sc = make_case(case, p1, 0.0)
        assert (dominant_growth_rate(sc) > 0) == (epidemic_threshold(sc) > 1)


# ---------------------------------------------------------------------------
# spectral radius

def test_spectral_radius_identity_and_zero():
    assert spectral_radius(np.eye(6)) == pytest.approx(1.0, abs=1e-15)
    assert spectral_radius(np.zeros((4, 4))) == 0.0


def test_spectral_radius_rank_one(rng):
    u, v = rng.random(6), rng.random(6)
    assert spectral_radius(np.outer(u, v)) == pytest.approx(v @ u, rel=1e-12)


def test_spectral_radius_random_nonnegative(rng):
    for _ in range(50):
        A = rng.random((5, 5))
        assert spectral_radius(A) == pytest.approx(np.abs(np.linalg.eigvals(A)).max(), rel=1e-11)


def test_spectral_radius_stall_falls_back_to_compression():
    # rank 2 with eigenvalues 1 and 0.99999: power iteration barely moves
    u = np.array([1.0, 0, 0, 0, 0, 0])
    w = np.array([0, 1.0, 0, 0, 0, 0])
    M = np.outer(u, u) + 0.99999 * np.outer(w, w)
    assert spectral_radius(M) == pytest.approx(1.0, abs=1e-12)


def test_spectral_radius_gives_up_on_slow_full_rank():
    M = np.diag([1.0, 0.99999, 0.5, 0.4, 0.3, 0.2])
    with pytest.raises(ConvergenceError):
        spectral_radius(M)


def test_spectral_radius_rejects_bad_input():
    with pytest.raises(ValidationError):
        spectral_radius(np.ones((2, 3)))
    with pytest.raises(ValidationError):
        spectral_radius(-np.eye(2))


def test_M_has_rank_two(rng):
    for _ in range(50):
        M = build_next_generation(random_scenario(rng)).M
        sv = np.linalg.svd(M, compute_uv=False)
        assert sv[2] <= 1e-10 * sv[0]


# ---------------------------------------------------------------------------
# reduced coefficients and closed forms

def test_reduced_coefficients_case_c_against_oracle():
    sc = make_case("C", 0.3, 0.0)
    q = reduced_coefficients(sc)
    K = oracle_K(sc)
    assert q.q11 == pytest.approx(K[0, 0], rel=1e-12)
    assert q.q22 == pytest.approx(K[1, 1], rel=1e-12)
    # the off-diagonal pair is the oracle's, rescaled by R2/R1 (a similarity)
    assert q.q12 == pytest.approx(K[0, 1] * sc.R2 / sc.R1, rel=1e-12)
    assert q.q21 == pytest.approx(K[1, 0] * sc.R1 / sc.R2, rel=1e-12)
    # frozen from the oracle above
    assert (q.q11, q.q12, q.q21, q.q22) == pytest.approx(
        (0.5732359325499347, 0.2526679070305496, 0.32676406745006564, 0.8473320929694503), rel=1e-12)


def test_row_identities(rng):
    for _ in range(100):
        sc = random_scenario(rng)
        q = reduced_coefficients(sc)
        assert q.q11 + q.q21 == pytest.approx(sc.R1, rel=1e-13)
        assert q.q22 + q.q12 == pytest.approx(sc.R2, rel=1e-13)


def test_explicit_threshold_equals_oracle_eigenvalue(rng):
    for _ in range(100):
        sc = random_scenario(rng)
        K = oracle_K(sc)
        assert epidemic_threshold(sc) == pytest.approx(np.linalg.eigvals(K).real.max(), rel=1e-11)


def test_explicit_threshold_examples():
    assert threshold_explicit(ReducedMatrix(0.9, 0.0, 0.0, 1.1)) == pytest.approx(1.1)
    sc = Scenario(EpidemicParams(**REFERENCE_EPIDEMIC), MobilityParams(10, 10, 10, 1), PopulationSplit(1, 1, 0, 0))
    assert epidemic_threshold(sc) == pytest.approx(1.1)


def test_q_coefficients_broadcast():
    q = q_coefficients(0.9, 1.1, 0.3, 10, 10, 10, 1, np.array([0.5, 1.0]),
                       0.25, 0.25, 0.5, 1 / 22, 5 / 11)
    assert q[0].shape == (2,)


# ---------------------------------------------------------------------------
# alpha path

def test_alpha_without_transfer_is_zero():
    r, a = threshold_via_alpha(ReducedMatrix(0.9, 0.0, 0.3, 0.8), 0.9, 1.1)
    assert a == 0.0 and r == pytest.approx(1.1)


def test_alpha_is_smallest_root_of_the_polynomial():
    sc = make_case("B", 0.2, 0.0)
    q = reduced_coefficients(sc)
    r, a = threshold_via_alpha(q, sc.R1, sc.R2)
    gap = sc.R2 - sc.R1
    roots = np.sort(np.roots([gap, -(gap + q.q12 + q.q21), q.q12]).real)
    assert a == pytest.approx(roots[0], rel=1e-12)
    assert 0 <= a < 1
    assert r == pytest.approx(threshold_explicit(q), abs=1e-13)


def test_alpha_requires_ordered_labels():
    with pytest.raises(ValidationError):
        threshold_via_alpha(ReducedMatrix(1, 0.1, 0.1, 1), 1.0, 1.0)


def test_label_agnostic_alpha_ties_and_swap():
    assert alpha_threshold(1.2, 1.2, 0.3, 0.4) == (1.2, 0.0)
    sc = make_case("C", 0.4, 0.1)
    q = reduced_coefficients(sc)
    r, a = alpha_threshold(sc.R1, sc.R2, q.q12, q.q21)
    qs = reduced_coefficients(sc.swapped())
    rs, as_ = alpha_threshold(sc.R2, sc.R1, qs.q12, qs.q21)
    assert r == pytest.approx(rs, abs=1e-14) and a == pytest.approx(as_, abs=1e-14)


def test_threshold_report_cross_check():
    rep = threshold_report(make_case("A"))
    assert rep.r12_eigen == pytest.approx(rep.r12_explicit, abs=1e-9)
    d = rep.to_dict()
    assert set(d) >= {"r12_explicit", "r12_eigen", "alpha", "q11", "q12", "q21", "q22"}
    # an empty group makes M reducible; the cross-check is then skipped
    assert threshold_report(make_case("A", 1.0, 1.0)).r12_eigen is None


# ---------------------------------------------------------------------------
# properties

rate = st.floats(1e-2, 1e2)
size = st.floats(1e-3, 1.0)


@settings(max_examples=150, deadline=None)
@given(rate, rate, st.floats(0.05, 1.0), rate, rate, rate, rate, size, size, size, size)
def test_properties_against_spectral_radius(b1, b2, g, l1, m1, l2, m2, n1r, n2r, n1c, n2c):
    sc = Scenario(EpidemicParams(b1, b2, g), MobilityParams(l1, m1, l2, m2),
                  PopulationSplit(n1r, n2r, n1c, n2c))
    q = reduced_coefficients(sc)
    r = threshold_explicit(q)
    rho = spectral_radius(build_next_generation(sc).M)
    assert abs(r - rho) <= 1e-9 * max(1.0, r)
    lo, hi = sorted((sc.R1, sc.R2))
    assert lo - 1e-12 * hi <= r <= hi + 1e-12 * hi
    ra, a = alpha_threshold(sc.R1, sc.R2, q.q12, q.q21)
    assert 0 <= a < 1
    assert ra == pytest.approx(r, rel=1e-12, abs=1e-13)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 2.0), st.floats(0.05, 1.0), rate, rate, rate, rate, size, size, size, size)
def test_equal_transmission_collapses(b, g, l1, m1, l2, m2, n1r, n2r, n1c, n2c):
    sc = Scenario(EpidemicParams(b, b, g), MobilityParams(l1, m1, l2, m2),
                  PopulationSplit(n1r, n2r, n1c, n2c))
    assert abs(epidemic_threshold(sc) - b / g) <= 1e-12 * max(1.0, b / g)
