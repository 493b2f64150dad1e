"""Parameters, state and right-hand side of the two-patch commuter SIR model.

Each patch ``i`` hosts three groups of inhabitants whose home is ``i``:

* ``ir``  permanently resident, never leaves patch ``i``;
* ``ii``  commuters currently at home;
* ``ij``  commuters currently visiting patch ``j``.

Commuters leave home at rate ``lambda_i`` and come back at rate ``mu_i``.
Everyone physically present in patch ``i`` mixes homogeneously with force of
infection ``beta_i * (I_ir + I_ii + I_ji) / N_ip``, and recovery happens at
the same rate ``gamma`` everywhere.

All arrays indexed by group use the fixed order::

    (1r, 11, 12, 2r, 22, 21)

so that indices 0, 1, 5 are the groups present in patch 1 and indices
2, 3, 4 the groups present in patch 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .errors import ValidationError

GROUPS = ("1r", "11", "12", "2r", "22", "21")

# groups physically present in each patch
PATCH1_PRESENT = np.array([0, 1, 5])
PATCH2_PRESENT = np.array([2, 3, 4])
# patch in which each group is located (0 for patch 1, 1 for patch 2)
LOCATION = np.array([0, 0, 1, 1, 1, 0])


def _check_finite(**values):
    for name, value in values.items():
        if not math.isfinite(value):
            raise ValidationError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class EpidemicParams:
    """Transmission rates of both patches and the common recovery rate."""

    beta1: float
    beta2: float
    gamma: float

    def __post_init__(self):
        _check_finite(beta1=self.beta1, beta2=self.beta2, gamma=self.gamma)
        if self.gamma <= 0:
            raise ValidationError("gamma must be positive")
        if self.beta1 < 0 or self.beta2 < 0:
            raise ValidationError("beta1 and beta2 must be non-negative")

    @property
    def R1(self) -> float:
        return self.beta1 / self.gamma

    @property
    def R2(self) -> float:
        return self.beta2 / self.gamma


@dataclass(frozen=True)
class MobilityParams:
    """Commuting departure (``lambda``) and return (``mu``) rates."""

    lambda1: float
    mu1: float
    lambda2: float
    mu2: float

    def __post_init__(self):
        _check_finite(lambda1=self.lambda1, mu1=self.mu1,
                      lambda2=self.lambda2, mu2=self.mu2)
        if min(self.lambda1, self.mu1, self.lambda2, self.mu2) < 0:
            raise ValidationError("commuting rates must be non-negative")
        if self.lambda1 + self.mu1 <= 0:
            raise ValidationError("lambda1 + mu1 must be positive")
        if self.lambda2 + self.mu2 <= 0:
            raise ValidationError("lambda2 + mu2 must be positive")


@dataclass(frozen=True)
class PopulationSplit:
    """Resident and commuter population sizes of both patches."""

    N1r: float
    N2r: float
    N1c: float
    N2c: float

    def __post_init__(self):
        _check_finite(N1r=self.N1r, N2r=self.N2r, N1c=self.N1c, N2c=self.N2c)
        for name in ("N1r", "N2r", "N1c", "N2c"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be non-negative")
        if self.N1 <= 0:
            raise ValidationError("N1 = N1r + N1c must be positive")
        if self.N2 <= 0:
            raise ValidationError("N2 = N2r + N2c must be positive")

    @classmethod
    def from_proportions(cls, p1: float, p2: float,
                         N1: float = 1.0, N2: float = 1.0) -> PopulationSplit:
        """Build a split from the resident proportions ``p_i = N_ir / N_i``."""
        for name, p in (("p1", p1), ("p2", p2)):
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {p!r}")
        return cls(N1r=p1 * N1, N2r=p2 * N2,
                   N1c=(1.0 - p1) * N1, N2c=(1.0 - p2) * N2)

    @property
    def N1(self) -> float:
        return self.N1r + self.N1c

    @property
    def N2(self) -> float:
        return self.N2r + self.N2c

    @property
    def p1(self) -> float:
        return self.N1r / self.N1

    @property
    def p2(self) -> float:
        return self.N2r / self.N2


@dataclass(frozen=True)
class EquilibriumPopulations:
    """Balanced commuter sub-populations and the population present per patch."""

    N11: float
    N12: float
    N22: float
    N21: float
    N1p: float
    N2p: float


def equilibrium_split(mobility: MobilityParams,
                      population: PopulationSplit) -> EquilibriumPopulations:
    """Split each commuter population between home and the other patch.

    The commuter exchange ``dN_ii/dt = -lambda_i N_ii + mu_i N_ij`` relaxes to
    ``N_ii = mu_i/(lambda_i+mu_i) N_ic`` and ``N_ij = lambda_i/(lambda_i+mu_i) N_ic``.
    """
    l1, m1 = mobility.lambda1, mobility.mu1
    l2, m2 = mobility.lambda2, mobility.mu2
    if population.N1c > 0 and l1 + m1 <= 0:
        raise ValidationError("balanced split undefined: lambda1 + mu1 = 0 with N1c > 0")
    if population.N2c > 0 and l2 + m2 <= 0:
        raise ValidationError("balanced split undefined: lambda2 + mu2 = 0 with N2c > 0")

    N11 = m1 / (l1 + m1) * population.N1c if population.N1c > 0 else 0.0
    N21 = l2 / (l2 + m2) * population.N2c if population.N2c > 0 else 0.0
    # complements keep N_ii + N_ij == N_ic up to one rounding
    N12 = population.N1c - N11
    N22 = population.N2c - N21
    N1p = population.N1r + N11 + N21
    N2p = population.N2r + N22 + N12
    return EquilibriumPopulations(N11=N11, N12=N12, N22=N22, N21=N21, N1p=N1p, N2p=N2p)


def intrinsic_reproduction(epidemic: EpidemicParams) -> tuple[float, float]:
    """Reproduction numbers ``(beta1/gamma, beta2/gamma)`` of the isolated patches."""
    return epidemic.R1, epidemic.R2


@dataclass(frozen=True)
class Scenario:
    """One complete model instance."""

    epidemic: EpidemicParams
    mobility: MobilityParams
    population: PopulationSplit

    def __post_init__(self):
        eq = self.equilibrium
        if eq.N1p <= 0:
            raise ValidationError("nobody is present in patch 1 (N1p = 0)")
        if eq.N2p <= 0:
            raise ValidationError("nobody is present in patch 2 (N2p = 0)")

    @cached_property
    def equilibrium(self) -> EquilibriumPopulations:
        return equilibrium_split(self.mobility, self.population)

    @property
    def R1(self) -> float:
        return self.epidemic.R1

    @property
    def R2(self) -> float:
        return self.epidemic.R2

    @property
    def group_sizes(self) -> np.ndarray:
        """Balanced group sizes in the order ``(1r, 11, 12, 2r, 22, 21)``."""
        eq = self.equilibrium
        pop = self.population
        return np.array([pop.N1r, eq.N11, eq.N12, pop.N2r, eq.N22, eq.N21])

    @property
    def home_totals(self) -> np.ndarray:
        """``(N1r, N1c, N2r, N2c)``, constant along every trajectory."""
        pop = self.population
        return np.array([pop.N1r, pop.N1c, pop.N2r, pop.N2c])

    def with_commuters(self, N1c: float, N2c: float) -> Scenario:
        """Same patch sizes and rates, with ``N1c`` and ``N2c`` commuters."""
        N1, N2 = self.population.N1, self.population.N2
        return replace(self, population=PopulationSplit(
            N1r=N1 - N1c, N2r=N2 - N2c, N1c=N1c, N2c=N2c))

    def with_proportions(self, p1: float, p2: float) -> Scenario:
        pop = PopulationSplit.from_proportions(p1, p2, self.population.N1, self.population.N2)
        return replace(self, population=pop)

    def swapped(self) -> Scenario:
        """The same scenario with the patch labels 1 and 2 exchanged."""
        epi, mob, pop = self.epidemic, self.mobility, self.population
        return Scenario(
            EpidemicParams(beta1=epi.beta2, beta2=epi.beta1, gamma=epi.gamma),
            MobilityParams(lambda1=mob.lambda2, mu1=mob.mu2,
                           lambda2=mob.lambda1, mu2=mob.mu1),
            PopulationSplit(N1r=pop.N2r, N2r=pop.N1r, N1c=pop.N2c, N2c=pop.N1c),
        )


def mobility_matrix(mobility: MobilityParams) -> np.ndarray:
    """6x6 generator of the commuter exchange acting on any group vector."""
    l1, m1, l2, m2 = mobility.lambda1, mobility.mu1, mobility.lambda2, mobility.mu2
    B = np.zeros((6, 6))
    B[1, 1], B[1, 2] = -l1, m1
    B[2, 1], B[2, 2] = l1, -m1
    B[4, 4], B[4, 5] = -l2, m2
    B[5, 4], B[5, 5] = l2, -m2
    return B


@dataclass(frozen=True)
class StateVector:
    """Susceptible, infected and recovered sizes of the six groups.

    Also used to carry time-derivatives, in which case the non-negativity
    check is disabled with ``derivative=True``.
    """

    S: np.ndarray
    I: np.ndarray
    R: np.ndarray
    derivative: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("S", "I", "R"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (6,):
                raise ValidationError(f"{name} must have 6 components, got shape {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name} has non-finite components")
            if not self.derivative and np.any(arr < 0):
                raise ValidationError(f"{name} has negative components")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @classmethod
    def from_array(cls, y, derivative: bool = False) -> StateVector:
        y = np.asarray(y, dtype=float).reshape(3, 6)
        return cls(y[0], y[1], y[2], derivative=derivative)

    def as_array(self) -> np.ndarray:
        """Flat 18-vector ``[S(6), I(6), R(6)]``."""
        return np.concatenate([self.S, self.I, self.R])

    @property
    def group_totals(self) -> np.ndarray:
        return self.S + self.I + self.R

    @property
    def home_totals(self) -> np.ndarray:
        """``(N1r, N1c, N2r, N2c)`` as carried by this state."""
        g = self.group_totals
        return np.array([g[0], g[1] + g[2], g[3], g[4] + g[5]])

    @classmethod
    def disease_free(cls, scenario: Scenario) -> StateVector:
        return cls(scenario.group_sizes, np.zeros(6), np.zeros(6))

    @classmethod
    def seeded(cls, scenario: Scenario, fraction: float) -> StateVector:
        """Disease-free state with ``fraction`` of every group moved from S to I."""
        sizes = scenario.group_sizes
        return cls((1.0 - fraction) * sizes, fraction * sizes, np.zeros(6))


def make_rhs(scenario: Scenario):
    """Return ``f(t, y)`` evaluating the 18 time-derivatives on flat arrays.

    Present-population denominators are the balanced constants ``N_ip``.
    """
    eq = scenario.equilibrium
    if eq.N1p <= 0 or eq.N2p <= 0:
        raise ValidationError("empty patch: N_ip must be positive")
    betas_over_n = np.array([scenario.epidemic.beta1 / eq.N1p,
                             scenario.epidemic.beta2 / eq.N2p])
    gamma = scenario.epidemic.gamma
    # force of infection felt by each group: weighted sum of I over co-located groups
    same_patch = LOCATION[:, None] == LOCATION[None, :]
    W = np.where(same_patch, betas_over_n[LOCATION][:, None], 0.0)
    # linear part: commuter exchange within each compartment plus recovery
    B = mobility_matrix(scenario.mobility)
    L = np.zeros((18, 18))
    for k in range(3):
        L[6 * k:6 * k + 6, 6 * k:6 * k + 6] = B
    L[6:12, 6:12] -= gamma * np.eye(6)
    L[12:18, 6:12] += gamma * np.eye(6)

    def rhs(t, y):
        infections = (W @ y[6:12]) * y[0:6]
        dy = L @ y
        dy[0:6] -= infections
        dy[6:12] += infections
        return dy

    return rhs


def ode_rhs(scenario: Scenario, state: StateVector) -> StateVector:
    """Time-derivative of ``state`` under ``scenario``."""
    dy = make_rhs(scenario)(0.0, state.as_array())
    return StateVector.from_array(dy, derivative=True)
