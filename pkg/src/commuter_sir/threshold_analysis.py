"""Fast-mixing approximation of the threshold and its minimization.

When commuting is fast compared with recovery, setting ``gamma = 0`` inside
the mixing factors of the reduced coefficients leaves only two of them to
track, both rational in the commuter numbers ``N1c`` and ``N2c``::

    eta_i = lambda_i / (lambda_i + mu_i)
    q21 ~ R1 [(1-eta1) eta1 N1c + eta2 (1-eta2) N2c] / (N1 - eta1 N1c + eta2 N2c)
    q12 ~ R2 [eta1 (1-eta1) N1c + (1-eta2) eta2 N2c] / (N2 - eta2 N2c + eta1 N1c)

Everything here assumes the labelling ``R2 > R1`` (patch 2 is the core
group) unless stated otherwise. With that labelling the approximate threshold
always decreases with ``N2c`` and, as a function of ``N1c``, is decreasing,
increasing, or decreasing then increasing.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConsistencyError, HypothesisError, ValidationError
from .model import MobilityParams, Scenario
from .ngm import alpha_threshold, epidemic_threshold

FD_STEP = 1e-6
MINIMIZER_TOL = 1e-9


@dataclass(frozen=True)
class EtaPair:
    eta1: float
    eta2: float


@dataclass(frozen=True)
class ApproxCoefficients:
    tq12: float
    tq21: float


class Monotonicity(str, enum.Enum):
    DECREASING = "decreasing"
    INCREASING = "increasing"
    UNIMODAL = "unimodal"


@dataclass(frozen=True)
class MonotonicityClass:
    """Shape of ``N1c -> R12~(N1c, N2c)`` on ``[0, N1]`` at fixed ``N2c``.

    ``n1c_star`` is the interior minimizer, set only for the unimodal shape.
    """

    kind: Monotonicity
    n1c_star: Optional[float] = None
    slope_at_0: float = math.nan
    slope_at_N1: float = math.nan


@dataclass(frozen=True)
class MinimizerResult:
    n1c_star: float
    n2c_star: float
    r12_min: float
    r12_tilde_min: float
    boundary_flags: tuple[str, ...]
    monotonicity: Monotonicity
    N1: float
    N2: float

    @property
    def p1_star(self) -> float:
        return 1.0 - self.n1c_star / self.N1

    @property
    def p2_star(self) -> float:
        return 1.0 - self.n2c_star / self.N2

    def to_dict(self) -> dict:
        return {
            "N1c_star": self.n1c_star,
            "N2c_star": self.n2c_star,
            "p1_star": self.p1_star,
            "p2_star": self.p2_star,
            "r12_min": self.r12_min,
            "r12_tilde_min": self.r12_tilde_min,
            "boundary_flags": list(self.boundary_flags),
            "monotonicity_in_N1c": self.monotonicity.value,
        }


def eta(mobility: MobilityParams) -> EtaPair:
    """Fraction of time a commuter spends away from home, per patch."""
    s1 = mobility.lambda1 + mobility.mu1
    s2 = mobility.lambda2 + mobility.mu2
    if s1 <= 0 or s2 <= 0:
        raise ValidationError("lambda_i + mu_i must be positive to define eta_i")
    return EtaPair(mobility.lambda1 / s1, mobility.lambda2 / s2)


# ---------------------------------------------------------------------------
# raw formulas, valid for any (N1c, N2c) where the denominators are positive

def _approx_q(R1, R2, eta1, eta2, N1, N2, N1c, N2c):
    exchanged_1 = eta1 * (1.0 - eta1) * N1c
    exchanged_2 = eta2 * (1.0 - eta2) * N2c
    N1p = N1 - eta1 * N1c + eta2 * N2c
    N2p = N2 - eta2 * N2c + eta1 * N1c
    return R2 * (exchanged_1 + exchanged_2) / N2p, R1 * (exchanged_1 + exchanged_2) / N1p


class _Template:
    """Scalars of a scenario that do not depend on the commuter numbers."""

    def __init__(self, scenario: Scenario):
        e = eta(scenario.mobility)
        self.R1, self.R2 = scenario.R1, scenario.R2
        self.eta1, self.eta2 = e.eta1, e.eta2
        self.N1, self.N2 = scenario.population.N1, scenario.population.N2

    def q(self, N1c, N2c):
        return _approx_q(self.R1, self.R2, self.eta1, self.eta2, self.N1, self.N2, N1c, N2c)

    def r12(self, N1c, N2c):
        tq12, tq21 = self.q(N1c, N2c)
        return alpha_threshold(self.R1, self.R2, tq12, tq21)[0]


def approx_coefficients(scenario: Scenario) -> ApproxCoefficients:
    t = _Template(scenario)
    pop = scenario.population
    N1p = t.N1 - t.eta1 * pop.N1c + t.eta2 * pop.N2c
    N2p = t.N2 - t.eta2 * pop.N2c + t.eta1 * pop.N1c
    if N1p <= 0 or N2p <= 0:
        raise ValidationError("empty present population in a patch")
    tq12, tq21 = t.q(pop.N1c, pop.N2c)
    return ApproxCoefficients(tq12=float(tq12), tq21=float(tq21))


def approx_threshold(scenario: Scenario) -> tuple[float, float]:
    """``(R12~, alpha~)``; ``alpha~`` weighs the patch with the smaller intrinsic number."""
    c = approx_coefficients(scenario)
    return alpha_threshold(scenario.R1, scenario.R2, c.tq12, c.tq21)


def approx_threshold_grid(scenario: Scenario, N1c, N2c):
    """Approximate threshold at arrays of commuter numbers (sizes of ``scenario`` kept)."""
    return _Template(scenario).r12(np.asarray(N1c, dtype=float), np.asarray(N2c, dtype=float))


# ---------------------------------------------------------------------------
# sign analysis in N1c

def increase_condition_a(scenario: Scenario) -> bool:
    """Sufficient condition for ``R12~`` to increase with ``N1c`` at the current point."""
    e = eta(scenario.mobility)
    N2, N2c = scenario.population.N2, scenario.population.N2c
    return bool(e.eta2 * (1.0 - e.eta2) * N2c > (1.0 - e.eta1) * (N2 - e.eta2 * N2c))


def sign_indicators_AB(scenario: Scenario) -> tuple[float, float]:
    """The indicators ``(A, B)``.

    ``A < 0`` is equivalent to ``alpha~ > 1/2`` and ``B < 0`` to
    ``dq12/dN1c < dq21/dN1c``; both negative make ``R12~`` increase with
    ``N1c``, both positive make it decrease.
    """
    e = eta(scenario.mobility)
    e1, e2 = e.eta1, e.eta2
    R1, R2 = scenario.R1, scenario.R2
    pop = scenario.population
    N1, N2, N1c, N2c = pop.N1, pop.N2, pop.N1c, pop.N2c
    N1p = N1 - e1 * N1c + e2 * N2c
    N2p = N2 - e2 * N2c + e1 * N1c
    if N1p <= 0 or N2p <= 0:
        raise ValidationError("empty present population in a patch")

    A = (R2 * (N2 / 2 - e1 * (0.5 - e1) * N1c - (1.5 - e2) * e2 * N2c) / N2p
         - R1 * (N1 / 2 - (1.5 - e1) * e1 * N1c - e2 * (0.5 - e2) * N2c) / N1p)
    B = (R2 * ((1 - e1) * (N2 - e2 * N2c) - e2 * (1 - e2) * N2c) / N2p ** 2
         - R1 * ((1 - e1) * (N1 + e2 * N2c) + e2 * (1 - e2) * N2c) / N1p ** 2)
    return float(A), float(B)


def approx_q_derivatives_n1c(scenario: Scenario) -> tuple[float, float]:
    """Closed-form ``(dq12~/dN1c, dq21~/dN1c)`` at the current point."""
    e = eta(scenario.mobility)
    e1, e2 = e.eta1, e.eta2
    pop = scenario.population
    N1, N2, N1c, N2c = pop.N1, pop.N2, pop.N1c, pop.N2c
    N1p = N1 - e1 * N1c + e2 * N2c
    N2p = N2 - e2 * N2c + e1 * N1c
    d12 = scenario.R2 * e1 * ((1 - e1) * (N2 - e2 * N2c) - e2 * (1 - e2) * N2c) / N2p ** 2
    d21 = scenario.R1 * e1 * ((1 - e1) * (N1 + e2 * N2c) + e2 * (1 - e2) * N2c) / N1p ** 2
    return float(d12), float(d21)


def approx_slope_n1c(scenario: Scenario) -> float:
    """``dR12~/dN1c`` by implicit differentiation of the alpha polynomial (``R2 > R1``).

    ``dalpha/dN1c = sigma / nu`` with ``sigma = (1-a) dq12 - a dq21`` and
    ``nu = R2 - R1 + q12 + q21 - 2 a (R2 - R1) > 0``.
    """
    R1, R2 = scenario.R1, scenario.R2
    if not R2 > R1:
        raise HypothesisError("requires R2 > R1")
    c = approx_coefficients(scenario)
    _, a = alpha_threshold(R1, R2, c.tq12, c.tq21)
    d12, d21 = approx_q_derivatives_n1c(scenario)
    sigma = (1 - a) * d12 - a * d21
    nu = R2 - R1 + c.tq12 + c.tq21 - 2 * a * (R2 - R1)
    return float(-(R2 - R1) * sigma / nu)


# ---------------------------------------------------------------------------
# shape in N1c and minimization

def golden_section_minimize(func: Callable[[float], float], a: float, b: float,
                            tol: float) -> tuple[float, float]:
    """Minimize a unimodal ``func`` on ``[a, b]``; returns ``(x, func(x))`` with
    ``x`` within ``tol`` of the minimizer."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = func(c), func(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = func(d)
    x = 0.5 * (a + b)
    return x, func(x)


def _require_core_group_2(scenario: Scenario):
    if not scenario.R2 > scenario.R1:
        raise HypothesisError(
            f"requires R2 > R1 (got R1={scenario.R1!r}, R2={scenario.R2!r})")


def classify_monotonicity(template: Scenario, n2c: float,
                          fd_step: float = FD_STEP) -> MonotonicityClass:
    """Shape of ``N1c -> R12~(N1c, n2c)`` on ``[0, N1]``.

    Only the patch sizes and rates of ``template`` are used. Slopes at both
    ends come from central differences of step ``fd_step * N1`` (the
    rational formula extends smoothly past the box). Endpoint slopes
    ``(-, +)`` mean an interior minimum, located by golden-section search;
    ``(+, -)`` would be an interior maximum, which cannot happen.
    """
    _require_core_group_2(template)
    t = _Template(template)
    if not 0.0 <= n2c <= t.N2:
        raise ValidationError(f"n2c must lie in [0, N2={t.N2}], got {n2c!r}")

    h = fd_step * t.N1
    slope0 = (t.r12(h, n2c) - t.r12(-h, n2c)) / (2 * h)
    slope1 = (t.r12(t.N1 + h, n2c) - t.r12(t.N1 - h, n2c)) / (2 * h)
    # below this the difference quotient is rounding noise
    flat = 1e-8 * t.R2 / t.N1

    if slope0 > flat and slope1 < -flat:
        raise ConsistencyError(
            f"R12~ has an interior maximum in N1c (slopes {slope0:.3e}, {slope1:.3e})")
    if slope0 < -flat and slope1 > flat:
        n1c_star, _ = golden_section_minimize(
            lambda x: t.r12(x, n2c), 0.0, t.N1, MINIMIZER_TOL * t.N1)
        return MonotonicityClass(Monotonicity.UNIMODAL, n1c_star, slope0, slope1)
    if slope0 < -flat or slope1 < -flat:
        return MonotonicityClass(Monotonicity.DECREASING, None, slope0, slope1)
    return MonotonicityClass(Monotonicity.INCREASING, None, slope0, slope1)


def minimize_threshold(template: Scenario) -> MinimizerResult:
    """Commuter numbers ``(N1c*, N2c*)`` minimizing the threshold.

    The search runs on the fast-mixing approximation: the core group's
    commuters are all sent (``N2c* = N2``) and ``N1c*`` follows from the
    shape in ``N1c``. ``r12_min`` is the exact threshold at that point,
    ``r12_tilde_min`` the approximate one. Patch labels are swapped
    internally when ``R1 > R2``.
    """
    if template.R1 == template.R2:
        raise HypothesisError("R1 == R2: the threshold is constant, no unique minimizer")
    if template.R1 > template.R2:
        res = minimize_threshold(template.swapped())
        flags = tuple(f.replace("N1", "#").replace("N2", "N1").replace("#", "N2")
                      for f in reversed(res.boundary_flags))
        return MinimizerResult(
            n1c_star=res.n2c_star, n2c_star=res.n1c_star, r12_min=res.r12_min,
            r12_tilde_min=res.r12_tilde_min, boundary_flags=flags,
            monotonicity=res.monotonicity, N1=res.N2, N2=res.N1)

    N1, N2 = template.population.N1, template.population.N2
    if not N1 * template.R2 > N2 * template.R1:
        raise HypothesisError("requires N1 * R2 > N2 * R1")

    n2c_star = N2
    shape = classify_monotonicity(template, n2c_star)
    if shape.kind is Monotonicity.DECREASING:
        n1c_star = N1
    elif shape.kind is Monotonicity.INCREASING:
        n1c_star = 0.0
    else:
        n1c_star = shape.n1c_star

    flags = []
    if n1c_star == 0.0:
        flags.append("N1c=0")
    elif n1c_star == N1:
        flags.append("N1c=N1")
    flags.append("N2c=N2")

    optimum = template.with_commuters(n1c_star, n2c_star)
    return MinimizerResult(
        n1c_star=n1c_star, n2c_star=n2c_star,
        r12_min=epidemic_threshold(optimum),
        r12_tilde_min=approx_threshold(optimum)[0],
        boundary_flags=tuple(flags), monotonicity=shape.kind, N1=N1, N2=N2)
