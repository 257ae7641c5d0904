"""Lyapunov exponent and density of states for the almost Mathieu operator.

In the supercritical regime lam > 1 the exponent equals log(lam) on the
spectrum.  The integrated density of states N(E) comes from Sturm counts on
finite boxes, and the Thouless formula links the two: L(E) is the
integral of log|E - E'| against dN(E').
"""

import math

import numpy as np

from qpcocycle import CocycleParams, amo, golden
from qpcocycle.spectral import ids_dirichlet, lyapunov_avalanche, lyapunov_birkhoff, thouless_check

freq = golden()
for lam in (0.5, 2.0, 10.0):
    p = CocycleParams(amo(), lam, 0.0, freq)
    est = lyapunov_birkhoff(p, 20000, phases=16)
    print(f"lam={lam:5.1f}  L(0)={est.value:.4f}  max(0, log lam)={max(0.0, math.log(lam)):.4f}")

p = CocycleParams(amo(), 10.0, 0.0, freq)
ap = lyapunov_avalanche(p, 100, 8, 3, phases=16)
print(f"\ndoubling extrapolation 2 L_2n - L_n at lam=10: {ap.value:.6f} (log 10 = {math.log(10):.6f})")

lam = 2.0
es = np.linspace(-6.5, 6.5, 801)
grid = ids_dirichlet(CocycleParams(amo(), lam, 0.0, freq), es, 1000, phases=4)
print(f"\nN(0) at lam={lam}: {grid[400].value:.4f} (symmetry forces 1/2)")
for E in (0.0, 1.0):
    L = lyapunov_birkhoff(CocycleParams(amo(), lam, E, freq), 20000, phases=16).value
    print(f"E={E}: direct L={L:.4f}  Thouless integral={thouless_check(E, grid):.4f}")
