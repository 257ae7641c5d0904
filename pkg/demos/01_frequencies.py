"""How fast do the denominators of a frequency grow?

The golden mean has the slowest possible growth (Fibonacci numbers), so its
growth exponent beta is 0.  A synthetic Liouville-type frequency is built
so that q_{k+1} ~ exp(beta q_k); its estimate should land near the target.
"""

from qpcocycle.frequency import beta_estimate, convergent_bounds, golden, synth

g = golden(10**12)
print("golden mean denominators:", g.q[:12], "...")
print("beta_hat (tail from k=5):", round(beta_estimate(g, tail_start=5).beta_hat, 5))

print("\nconvergents sandwich |alpha - p/q| between two simple bounds:")
for k in (2, 5, 10):
    lo, err, hi = (float(v) for v in convergent_bounds(g, k))
    print(f"  k={k:2d}  {lo:.3e} <= {err:.3e} <= {hi:.3e}")

print("\nsynthetic frequencies with a planted growth exponent:")
for beta in (0.5, 1.0, 2.0):
    f = synth(beta, 6)
    print(f"  target {beta:.1f}  estimate {beta_estimate(f).beta_hat:.3f}  flags {sorted(f.flags)}")
