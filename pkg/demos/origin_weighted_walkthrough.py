"""
Solutions with a singular origin head
=====================================

The second composite operator admits solutions that blow up like
t^(alpha-1) at the origin. This walkthrough checks the weighted-origin
contraction constant, solves for the fixed point, and reads both ends
of the solution: the weighted limit at 0 and the fractional derivative
at the horizon.

Run with:  python3 demos/origin_weighted_walkthrough.py
"""

import math

from fracasym import (
    Coefficient,
    SolveSpec,
    TailModel,
    boundary_limits,
    solve,
    thm2_constants,
)

ALPHA = 0.5

# the coefficient must vanish at the origin fast enough to pay for the
# singular weight s^-(1+alpha); here a(t) ~ t^2 near 0
coeff = Coefficient.from_expression(
    "0.01 * t^2 / (1+t)^6", envelope=TailModel("power", 0.01, 4.0, 1.0))

print("== weighted-origin contraction constant ==")
report = thm2_constants(coeff, ALPHA, T=1.0)
print(f"k4 = {report.k4:.6e}   gate: {report.k_status}")
print(f"measured origin exponent of the coefficient: "
      f"{report.origin_exponent:.4f} (needs > alpha = {ALPHA})")

print()
print("== fixed-point iteration seeded with a t^(alpha-1) + b t^alpha ==")
spec = SolveSpec("thm2", ALPHA, 1.0, 1.0, coeff)
result = solve(spec)
print(f"converged in {result.iterations} iterations")
print("successive distances:",
      "  ".join(f"{d:.3e}" for d in result.distances))

print()
print("== both ends of the solution ==")
lims = boundary_limits(result.fixed_point, "thm2", ALPHA)
print(f"limit of t^(1-alpha) x(t) at 0: {lims.origin_limit:.10f}"
      f"  (true head scalar a = 1, settled: {lims.origin_converged})")
want = math.gamma(1.0 + ALPHA)
print(f"fractional derivative at t = {lims.horizon_node:.2f}: "
      f"{lims.derivative_at_horizon:.10f}")
print(f"expected level Gamma(1+alpha) * b = {want:.10f}"
      f"  (difference {abs(lims.derivative_at_horizon - want):.2e})")
