"""
Fast-mixing approximation
=========================

When commuting is fast compared with recovery, the threshold depends on the
mobility rates only through ``eta_i = lambda_i / (lambda_i + mu_i)``. This
script measures how far that approximation is from the exact value over the
whole grid of resident proportions.
"""

import tempfile
from pathlib import Path

import numpy as np

import commuter_sir as cs
from commuter_sir.experiments import bundled_case

##############################################################################
# The three reference cases share the epidemic rates and differ in how
# commuters move.

for case in "ABC":
    sf = bundled_case(case)
    eta = cs.eta(sf.scenario.mobility)
    sweep = cs.run_sweep(sf.scenario, 201, 201)
    print(f"case {case}: eta = ({eta.eta1:.4f}, {eta.eta2:.4f}), "
          f"max |R12~ - R12| on 201x201 = {sweep.max_gap:.3e}")
    for w in sf.warnings:
        print("   note:", w)

##############################################################################
# The gap shrinks as commuting speeds up. Scaling all four rates of case C
# by a common factor leaves ``eta`` unchanged.

base = bundled_case("C").scenario
for factor in (0.1, 1, 10, 100):
    m = base.mobility
    fast = cs.Scenario(base.epidemic,
                       cs.MobilityParams(m.lambda1 * factor, m.mu1 * factor,
                                         m.lambda2 * factor, m.mu2 * factor),
                       base.population)
    print(f"rates x{factor:>5}: max gap = {cs.run_sweep(fast, 51, 51).max_gap:.3e}")

##############################################################################
# Figure data
# -----------
#
# One curve per value of ``p2``. The SVG has a dashed line at ``R12 = 1``.

out = Path(tempfile.mkdtemp())
sweep = cs.run_sweep(base, 201, 11)
paths = cs.emit_figure_data(sweep, out, stem="case_C", title="R12 versus p1, case C")
print("wrote", *map(str, paths))
print("p2 = 0 curve minimum at p1 =", sweep.p1[int(np.argmin(sweep.r12_exact[0]))])
