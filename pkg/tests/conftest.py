from __future__ import annotations

import numpy as np
import pytest

from commuter_sir import EpidemicParams, MobilityParams, PopulationSplit, Scenario

# reference epidemic rates: R1 = 0.9, R2 = 1.1
REFERENCE_EPIDEMIC = dict(beta1=0.27, beta2=0.33, gamma=0.3)
CASE_RATES = {
    "A": dict(lambda1=10.0, mu1=10.0, lambda2=10.0, mu2=1.0),
    "B": dict(lambda1=10.0, mu1=100.0, lambda2=10.0, mu2=100.0),
    "C": dict(lambda1=10.0, mu1=10.0, lambda2=10.0, mu2=70.0),
}


def make_case(case: str, p1: float = 0.5, p2: float = 0.5) -> Scenario:
    return Scenario(EpidemicParams(**REFERENCE_EPIDEMIC), MobilityParams(**CASE_RATES[case]),
                    PopulationSplit.from_proportions(p1, p2))


def random_scenario(rng: np.random.Generator, equal_beta: bool = False) -> Scenario:
    """Rates log-uniform in [1e-2, 1e2], group sizes uniform in (0, 1), gamma in [0.05, 1]."""
    def rate():
        return float(np.exp(rng.uniform(np.log(1e-2), np.log(1e2))))

    beta1 = rate()
    beta2 = beta1 if equal_beta else rate()
    gamma = float(rng.uniform(0.05, 1.0))
    mob = MobilityParams(rate(), rate(), rate(), rate())
    pop = PopulationSplit(*(float(v) for v in rng.uniform(0.0, 1.0, 4)))
    return Scenario(EpidemicParams(beta1, beta2, gamma), mob, pop)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=["A", "B", "C"])
def case(request):
    return request.param
