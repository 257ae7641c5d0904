"""Tracking critical points of the angle function through induction levels.

At level 0 the angle function is arctan(t - v(x)); its zeros are the
critical points.  Each level composes the cocycle over return times to a
small neighbourhood of those points, moves the zeros slightly and checks
that the returns are strongly hyperbolic.
"""

import math

from qpcocycle import CocycleParams, amo, golden
from qpcocycle.induction import bifurcation_diagnose, run_induction

p = CocycleParams(amo(), 20.0, 0.0, golden())
for r in run_induction(p, levels=4):
    pts = ", ".join(f"{c:.6f}" for c in r.critical_points)
    print(f"level {r.level}: q={r.q:4d} case {r.case:3s} r+={r.r_plus_min:4d} "
          f"growth pass {r.growth_pass_fraction:.0%}  drift {max(r.drift):.1e}  points [{pts}]")

print("\nresonant pair: two critical points merge when their separation drops below d0")
l = 1e3
reps, d0, flags = bifurcation_diagnose(4 * math.pi, 4 * math.pi, l)
for rep in reps[::6]:
    print(f"  d*l={rep.d * l:7.3f}  zeros={rep.zero_count}  min|g|={rep.min_abs:.2e}")
print(f"transition at d0*l = {d0 * l:.4f} (affine model: {2 / (4 * math.pi):.4f})  flags={sorted(flags)}")
