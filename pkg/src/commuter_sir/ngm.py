"""Next-generation matrices and the epidemic threshold ``R12``.

The 6x6 next-generation matrix ``M = F V^-1`` has rank two: its image is
spanned by one vector supported on the groups present in patch 1 and one
supported on the groups present in patch 2. Its Perron root is therefore the
Perron root of a 2x2 nonnegative matrix ``[[q11, q12], [q21, q22]]`` whose
entries have closed forms, which gives the explicit threshold used as the
authoritative value. Power iteration on the full ``M`` is kept as an
independent cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import ConsistencyError, ConvergenceError, ValidationError
from .model import PATCH1_PRESENT, PATCH2_PRESENT, Scenario, mobility_matrix

CROSS_CHECK_TOL = 1e-9


@dataclass(frozen=True)
class NextGenMatrices:
    """New-infection matrix ``F``, transition matrix ``V`` and ``M = F V^-1``."""

    F: np.ndarray
    V: np.ndarray
    M: np.ndarray

    @property
    def A(self) -> np.ndarray:
        """Infected-block Jacobian ``F - V`` at the disease-free equilibrium."""
        return self.F - self.V


@dataclass(frozen=True)
class ReducedMatrix:
    q11: float
    q12: float
    q21: float
    q22: float

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.q11, self.q12], [self.q21, self.q22]])

    def swapped(self) -> ReducedMatrix:
        return ReducedMatrix(q11=self.q22, q12=self.q21, q21=self.q12, q22=self.q11)


@dataclass(frozen=True)
class ThresholdReport:
    """Threshold of one scenario.

    ``alpha`` is the weight of the patch with the smaller intrinsic
    reproduction number in ``R12 = alpha * R_low + (1 - alpha) * R_high``;
    it is 0 when both patches have the same intrinsic number.
    ``r12_eigen`` is ``None`` when the power-iteration cross-check was skipped.
    """

    r12_explicit: float
    r12_eigen: Optional[float]
    alpha: float
    reduced: ReducedMatrix
    R1: float
    R2: float

    def to_dict(self) -> dict:
        return {
            "R1": self.R1,
            "R2": self.R2,
            "r12_explicit": self.r12_explicit,
            "r12_eigen": self.r12_eigen,
            "alpha": self.alpha,
            "q11": self.reduced.q11,
            "q12": self.reduced.q12,
            "q21": self.reduced.q21,
            "q22": self.reduced.q22,
        }


# ---------------------------------------------------------------------------
# matrices

def build_next_generation(scenario: Scenario) -> NextGenMatrices:
    eq = scenario.equilibrium
    sizes = scenario.group_sizes
    beta1, beta2 = scenario.epidemic.beta1, scenario.epidemic.beta2
    gamma = scenario.epidemic.gamma

    F = np.zeros((6, 6))
    F[np.ix_(PATCH1_PRESENT, PATCH1_PRESENT)] = (beta1 * sizes[PATCH1_PRESENT] / eq.N1p)[:, None]
    F[np.ix_(PATCH2_PRESENT, PATCH2_PRESENT)] = (beta2 * sizes[PATCH2_PRESENT] / eq.N2p)[:, None]
    V = gamma * np.eye(6) - mobility_matrix(scenario.mobility)

    if np.linalg.cond(V) > 1e12:
        raise ConvergenceError("transition matrix V is numerically singular")
    # M V = F  <=>  V^T M^T = F^T
    M = np.linalg.solve(V.T, F.T).T
    scale = M.max(initial=0.0)
    M[(M < 0) & (M > -1e-14 * scale)] = 0.0
    return NextGenMatrices(F=F, V=V, M=M)


def dominant_growth_rate(scenario: Scenario) -> float:
    """Largest real part in the spectrum of ``F - V`` (linearized growth rate)."""
    A = build_next_generation(scenario).A
    return float(np.max(np.linalg.eigvals(A).real))


# ---------------------------------------------------------------------------
# spectral radius

def spectral_radius(M, tol: float = 1e-12, max_iter: int = 10_000) -> float:
    """Perron root of a nonnegative square matrix.

    Power iteration from the all-ones vector with a Rayleigh-quotient
    stopping rule. The geometric convergence ratio is estimated from
    successive quotient increments and folded into the error estimate. If
    the ratio is too close to one for ``max_iter`` to suffice, the root is
    taken instead from the characteristic polynomial of the rank-<=2
    compression of ``M``.
    """
    M = np.array(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValidationError("matrix has non-finite entries")
    scale = np.abs(M).max(initial=0.0)
    if scale == 0.0:
        return 0.0
    if M.min() < -1e-12 * scale:
        raise ValidationError("matrix must be entrywise non-negative")
    M[M < 0] = 0.0

    n = M.shape[0]
    x = np.full(n, 1.0 / np.sqrt(n))
    rho_prev = diff_prev = None
    for k in range(max_iter):
        y = M @ x
        rho = float(x @ y)
        norm = float(np.linalg.norm(y))
        if norm == 0.0:
            return 0.0
        x = y / norm
        if rho_prev is not None:
            diff = abs(rho - rho_prev)
            if diff == 0.0:
                return rho
            if diff_prev:
                ratio = diff / diff_prev
                if ratio < 1.0 and diff <= tol * rho and diff * ratio / (1.0 - ratio) <= tol * rho:
                    return rho
                # predicted iterations to reach tol exceed the budget
                if k >= 100 and ratio > 0.99:
                    break
            diff_prev = diff
        rho_prev = rho

    return _low_rank_perron(M)


def _low_rank_perron(M: np.ndarray) -> float:
    """Perron root via a rank-revealing compression ``M = C X``.

    The nonzero eigenvalues of ``C X`` are those of the small matrix ``X C``.
    """
    _, R, piv = scipy.linalg.qr(M, pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > 1e-10 * diag[0]))
    if rank > 2:
        raise ConvergenceError(
            f"power iteration stalled and the matrix has rank {rank} > 2; "
            "use the explicit threshold formula")
    C = M[:, piv[:rank]]
    X, *_ = np.linalg.lstsq(C, M, rcond=None)
    if np.abs(C @ X - M).max() > 1e-9 * np.abs(M).max():
        raise ConvergenceError("rank-revealing compression failed")
    K = X @ C
    if rank == 1:
        return float(abs(K[0, 0]))
    # closed-form root; a polynomial solver loses half the digits when the
    # two eigenvalues nearly coincide
    half_diff = 0.5 * (K[0, 0] - K[1, 1])
    disc = half_diff * half_diff + K[0, 1] * K[1, 0]
    return float(0.5 * (K[0, 0] + K[1, 1]) + np.sqrt(max(disc, 0.0)))


# ---------------------------------------------------------------------------
# closed forms

def q_coefficients(R1, R2, gamma, lambda1, mu1, lambda2, mu2,
                   N1r, N11, N12, N2r, N22, N21):
    """The four reduced coefficients from group sizes; broadcasts over arrays.

    ``gamma = 0`` gives the fast-mixing approximation.
    """
    N1p = N1r + N11 + N21
    N2p = N2r + N22 + N12
    k1 = 1.0 / (gamma + lambda1 + mu1)
    k2 = 1.0 / (gamma + lambda2 + mu2)
    q11 = R1 * (N1r + N11 * (gamma + mu1) * k1 + N21 * (gamma + lambda2) * k2) / N1p
    q22 = R2 * (N2r + N22 * (gamma + mu2) * k2 + N12 * (gamma + lambda1) * k1) / N2p
    q21 = R1 * (N11 * lambda1 * k1 + N21 * mu2 * k2) / N1p
    q12 = R2 * (N12 * mu1 * k1 + N22 * lambda2 * k2) / N2p
    return q11, q12, q21, q22


def reduced_coefficients(scenario: Scenario, gamma: Optional[float] = None) -> ReducedMatrix:
    """Reduced 2x2 matrix of ``scenario``.

    ``gamma`` overrides the recovery rate inside the mixing factors only
    (``R1``, ``R2`` keep their true values); ``gamma=0`` is the fast-mixing limit.
    """
    g = scenario.epidemic.gamma if gamma is None else gamma
    mob, pop, eq = scenario.mobility, scenario.population, scenario.equilibrium
    q11, q12, q21, q22 = q_coefficients(
        scenario.R1, scenario.R2, g, mob.lambda1, mob.mu1, mob.lambda2, mob.mu2,
        pop.N1r, eq.N11, eq.N12, pop.N2r, eq.N22, eq.N21)
    return ReducedMatrix(q11=float(q11), q12=float(q12), q21=float(q21), q22=float(q22))


def perron_root_2x2(q11, q12, q21, q22):
    """Largest eigenvalue of ``[[q11, q12], [q21, q22]]``; broadcasts."""
    return 0.5 * (q11 + q22 + np.sqrt((q22 - q11) ** 2 + 4.0 * q12 * q21))


def threshold_explicit(q: ReducedMatrix) -> float:
    return float(perron_root_2x2(q.q11, q.q12, q.q21, q.q22))


def _smallest_alpha(gap, q12, q21):
    """Smallest root of ``gap a^2 - (gap + q12 + q21) a + q12`` for ``gap > 0``.

    Written as ``2 c / (b + sqrt(disc))`` so that small ``q12`` loses no digits;
    ``disc`` is expanded as a sum of squares to stay non-negative.
    """
    b = gap + q12 + q21
    disc = (gap + q21 - q12) ** 2 + 4.0 * q12 * q21
    return 2.0 * q12 / (b + np.sqrt(disc))


def threshold_via_alpha(q: ReducedMatrix, R1: float, R2: float) -> tuple[float, float]:
    """``(R12, alpha)`` with ``R12 = alpha R1 + (1 - alpha) R2``; needs ``R2 > R1``."""
    if not R2 > R1:
        raise ValidationError("threshold_via_alpha requires R2 > R1; swap the patch labels")
    alpha = float(_smallest_alpha(R2 - R1, q.q12, q.q21))
    return alpha * R1 + (1.0 - alpha) * R2, alpha


def alpha_threshold(R1, R2, q12, q21):
    """Label-agnostic ``(R12, alpha)``; broadcasts over arrays.

    ``alpha`` is the weight of the patch with the smaller intrinsic number.
    Ties return ``(R, 0)``.
    """
    R1, R2, q12, q21 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (R1, R2, q12, q21)))
    forward = R2 > R1
    gap = np.abs(R2 - R1)
    # in the relabelled problem the low patch always plays the role of patch 1
    q_to_high = np.where(forward, q12, q21)
    q_to_low = np.where(forward, q21, q12)
    r_low = np.minimum(R1, R2)
    r_high = np.maximum(R1, R2)
    with np.errstate(invalid="ignore", divide="ignore"):
        alpha = _smallest_alpha(gap, q_to_high, q_to_low)
    alpha = np.where(gap > 0, alpha, 0.0)
    r12 = alpha * r_low + (1.0 - alpha) * r_high
    if r12.ndim == 0:
        return float(r12), float(alpha)
    return r12, alpha


def _smallest_group_fraction(scenario: Scenario) -> float:
    sizes = scenario.group_sizes
    return float(sizes.min() / sizes.sum())


def threshold_report(scenario: Scenario, tol: float = 1e-12,
                     cross_check: bool = True) -> ThresholdReport:
    """Explicit threshold, alpha-path weight and (optionally) the eigen cross-check.

    The power-iteration cross-check is skipped when some group is empty
    (below ``1e-12`` of the total population), since ``M`` is then reducible.
    """
    q = reduced_coefficients(scenario)
    r12 = threshold_explicit(q)
    _, alpha = alpha_threshold(scenario.R1, scenario.R2, q.q12, q.q21)

    r12_eigen = None
    if cross_check and _smallest_group_fraction(scenario) >= 1e-12:
        r12_eigen = spectral_radius(build_next_generation(scenario).M, tol=tol)
        if abs(r12_eigen - r12) > CROSS_CHECK_TOL:
            raise ConsistencyError(
                f"explicit threshold {r12!r} disagrees with spectral radius {r12_eigen!r}")
    return ThresholdReport(r12_explicit=r12, r12_eigen=r12_eigen, alpha=alpha,
                           reduced=q, R1=scenario.R1, R2=scenario.R2)


def epidemic_threshold(scenario: Scenario) -> float:
    """``R12`` from the closed form."""
    return threshold_explicit(reduced_coefficients(scenario))
