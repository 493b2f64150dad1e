"""
Which commuting pattern minimizes the threshold
===============================================

With patch 2 the core group (``R2 > R1``), sending all of its inhabitants to
commute always helps. For patch 1 the answer depends on the mobility rates.
"""

import numpy as np

import commuter_sir as cs
from commuter_sir.experiments import bundled_case

##############################################################################
# Shape of the threshold in ``N1c`` with every inhabitant of patch 2
# commuting. The three reference cases give the three possible shapes.

for case in "ABC":
    sc = bundled_case(case).scenario
    shape = cs.classify_monotonicity(sc, n2c=sc.population.N2)
    print(f"case {case}: {shape.kind.value:10s} slopes at 0 and N1: "
          f"{shape.slope_at_0:+.4f}, {shape.slope_at_N1:+.4f}")

##############################################################################
# The minimizer
# -------------
#
# ``minimize_threshold`` works on the fast-mixing approximation and reports
# the exact threshold at the point it picks.

for case in "ABC":
    res = cs.minimize_threshold(bundled_case(case).scenario)
    print(f"case {case}: p1* = {res.p1_star:.5f}, p2* = {res.p2_star:.0f}, "
          f"R12 = {res.r12_min:.5f} (approx {res.r12_tilde_min:.5f}), flags {res.boundary_flags}")

##############################################################################
# A brute-force check on the exact threshold for case C.

sc = bundled_case("C").scenario
p1 = np.linspace(0, 1, 2001)
exact = [cs.epidemic_threshold(sc.with_proportions(p, 0.0)) for p in p1]
print("grid argmin of the exact threshold: p1 =", p1[int(np.argmin(exact))])

##############################################################################
# Two sufficient conditions
# -------------------------
#
# Condition (a) guarantees the threshold increases with ``N1c``. The signs
# of the indicators ``(A, B)`` settle the direction when they agree.

for p2 in (0.0, 0.5, 1.0):
    s = bundled_case("A").scenario.with_proportions(0.5, p2)
    A, B = cs.sign_indicators_AB(s)
    print(f"case A, p2 = {p2}: condition (a) {cs.increase_condition_a(s)}, A = {A:+.4f}, B = {B:+.4f}")
