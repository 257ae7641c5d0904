"""Large-deviation sets of the transfer-matrix cocycle.

The deviant set at scale ``i`` is

    B_i = {x : log ||A_i(x)|| / i < kappa * log(lam)}.

Two estimators are provided.  ``grid`` counts deviant points on a uniform
phase grid and cannot see sets smaller than ``1/phases``.  ``resonant``
exploits the structure of the set at large coupling: a product of
hyperbolic steps can only lose norm where one step nearly vanishes, i.e.
where ``x + k alpha`` is close to a level point ``z`` of ``E = lam v(z)``.
Writing ``A_i(x) = P_a M(e_k) P_b`` with ``e_k`` the small entry, the
deviant window in ``e_k`` is solved in closed form from the polar data of
``P_a`` and ``P_b`` and mapped back to phase through ``dv``.  Summing the
windows over all ``(z, k)`` gives the measure of ``B_i`` down to any size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .cocycle import CocycleParams, schrodinger_batch
from .spectral import phase_grid


def _check_lam(params: CocycleParams) -> None:
    if params.lam <= 1:
        raise ValueError("deviation threshold needs coupling > 1")


def deviation_fraction(params: CocycleParams, i: int, kappa: float = 0.9,
                       phases: int = 10**5, seed: int = 0) -> float:
    """Share of a uniform phase grid where ``log ||A_i|| / i < kappa log lam``."""
    _check_lam(params)
    if i < 1 or phases < 100:
        raise ValueError("need i >= 1 and phases >= 100")
    batch, _ = schrodinger_batch(params, phase_grid(phases, seed), i)
    return float(np.mean(batch.log_norm() < kappa * i * math.log(params.lam)))


def grid_fractions(params: CocycleParams, scales, kappa: float = 0.9, phases: int = 10**5,
                   seed: int = 0) -> list[float]:
    """Grid fractions at several scales in a single pass."""
    _check_lam(params)
    scales = sorted(int(i) for i in scales)
    xs = phase_grid(phases, seed)
    _, rec = schrodinger_batch(params, xs, scales[-1], checkpoints=scales)
    thr = kappa * math.log(params.lam)
    return [float(np.mean(rec[i] < thr * i)) for i in scales]


def deviant_phases(params: CocycleParams, i: int, kappa: float = 0.9, phases: int = 10**5,
                   seed: int = 0) -> np.ndarray:
    _check_lam(params)
    xs = phase_grid(phases, seed)
    batch, _ = schrodinger_batch(params, xs, i)
    return np.mod(xs[batch.log_norm() < kappa * i * math.log(params.lam)], 1.0)


# ---------------------------------------------------------------------------
# resonant estimator


def _polar_batch(batch):
    """log sigma, u, s per lane; identity lanes get the trivial frame."""
    ln = batch.log_norm()
    u, s = batch.angles()
    flat = ln < 1e-9
    u = np.where(flat, 0.0, u)
    s = np.where(flat, 0.5 * math.pi, s)
    return np.maximum(ln, 0.0), u, s


def _windows(params: CocycleParams, i: int, kappa: float, zeros: np.ndarray, iterations: int):
    """Deviant windows around ``z - k alpha`` for every level point z and 0 <= k < i."""
    alpha = params.alpha
    lam = params.lam
    ks = np.arange(i)
    z = np.repeat(zeros, i)
    k = np.tile(ks, zeros.size)
    shift = np.zeros(z.size)
    log_t = kappa * i * math.log(lam)
    for _ in range(iterations):
        x = np.mod(z + shift - k * alpha, 1.0)
        before, _ = schrodinger_batch(params, x, i, lengths=k)
        after_x = np.mod(z + shift + alpha, 1.0)
        after, _ = schrodinger_batch(params, after_x, i, lengths=i - 1 - k)
        lb, ub, _ = _polar_batch(before)
        la, _, sa = _polar_batch(after)
        # value of the middle entry that makes the product least expanding
        e0 = 1.0 / np.tan(sa) + np.tan(ub)
        zc = z + shift
        e_now = params.E - lam * params.potential.v(zc)
        slope = -lam * params.potential.dv(zc)
        step = (e0 - e_now) / slope
        shift = shift + np.clip(step, -1e-2, 1e-2)
    x_star = np.mod(z + shift - k * alpha, 1.0)
    slope = np.abs(lam * params.potential.dv(np.mod(z + shift, 1.0)))
    log_w = np.array([_window_log_width(*args, log_t) for args in zip(la, sa, lb, ub)])
    return x_star, log_w - np.log(slope)


def _window_log_width(la, sa, lb, ub, log_t) -> float:
    """log of the width in e of ``{e : ||D_a K(e) D_b|| < T}``.

    ``K(e) = R_{pi/2 - s_a} M(e) R_{u_b}`` and ``D = diag(sigma, 1/sigma)``.
    The squared Frobenius norm is quadratic in e.  The (1,1) entry of K is
    expanded about its exact root, since any roundoff there is multiplied by
    the largest weight.  mpmath keeps the huge and tiny weights in range.
    """
    ca, sna = math.sin(sa), math.cos(sa)  # cos and sin of pi/2 - s_a
    cb, snb = math.cos(ub), math.sin(ub)
    th = math.pi - sa + ub
    rot = (math.cos(th), -math.sin(th), math.sin(th), math.cos(th))
    lin = (ca * cb, -ca * snb, sna * cb, -sna * snb)
    if lin[0] == 0.0:
        return -math.inf
    e0 = -rot[0] / lin[0]
    const = (0.0,) + tuple(e0 * d + r for d, r in zip(lin[1:], rot[1:]))
    w = (mpmath.exp(2 * (la + lb)), mpmath.exp(2 * (la - lb)),
         mpmath.exp(2 * (lb - la)), mpmath.exp(-2 * (la + lb)))
    A = sum(wj * dj * dj for wj, dj in zip(w, lin))
    B = 2 * sum(wj * kj * dj for wj, kj, dj in zip(w, const, lin))
    C = sum(wj * kj * kj for wj, kj in zip(w, const))
    T2 = mpmath.exp(2 * log_t)
    disc = B * B - 4 * A * (C - T2 - 1 / T2)
    if disc <= 0:
        return -math.inf
    return float(mpmath.log(mpmath.sqrt(disc) / A))


def _log_union(centers: np.ndarray, log_widths: np.ndarray) -> float:
    """log of the length of a union of intervals on the circle.

    Overlapping intervals are merged; a merged group whose length cannot be
    represented in double precision is credited with its widest member.
    """
    live = np.isfinite(log_widths)
    if not np.any(live):
        return -math.inf
    c, lw = centers[live], log_widths[live]
    order = np.argsort(c)
    c, lw = c[order], lw[order]
    groups, cur = [], [0]
    for j in range(1, c.size):
        gap = c[j] - c[j - 1]
        reach = math.log(0.5) + np.logaddexp(lw[j], lw[j - 1])
        if gap <= 0 or math.log(gap) < reach:
            cur.append(j)
        else:
            groups.append(cur)
            cur = [j]
    groups.append(cur)
    logs = []
    for g in groups:
        if len(g) == 1:
            logs.append(lw[g[0]])
            continue
        w = np.exp(lw[g])
        lo = np.min(c[g] - 0.5 * w)
        hi = np.max(c[g] + 0.5 * w)
        logs.append(math.log(hi - lo) if hi > lo else float(np.max(lw[g])))
    return float(min(np.logaddexp.reduce(np.array(logs)), 0.0))


def resonant_measure(params: CocycleParams, i: int, kappa: float = 0.9,
                     iterations: int = 4, max_width: float = 1e-4):
    """log-measure of the deviant set from resonance windows.

    Returns ``(log_measure, flags)``.  ``wide-windows`` is flagged when some
    window exceeds ``max_width``: the local linearization is then less
    reliable and the grid estimator resolves the set anyway.
    """
    _check_lam(params)
    zeros = params.potential.level_set(params.E / params.lam)
    flags = set()
    if zeros.size == 0:
        flags.add("no-resonant-steps")
        return -math.inf, flags
    x_star, log_w = _windows(params, i, kappa, zeros, iterations)
    if np.any(log_w > math.log(max_width)):
        flags.add("wide-windows")
    return _log_union(x_star, log_w), flags


# ---------------------------------------------------------------------------
# decay fits


def fit_decay(scales, log_fractions, lam: float) -> tuple[float, float, int]:
    """Least squares ``log f = -delta * i * log(lam) + b`` over finite entries.

    Returns ``(delta_hat, rms_residual, points_used)``; nan when fewer than
    two scales carry a nonzero fraction.
    """
    i = np.asarray(scales, dtype=float)
    lf = np.asarray(log_fractions, dtype=float)
    live = np.isfinite(lf)
    if live.sum() < 2:
        return math.nan, math.nan, int(live.sum())
    xs = -i[live] * math.log(lam)
    coef = np.polyfit(xs, lf[live], 1)
    resid = lf[live] - np.polyval(coef, xs)
    return float(coef[0]), float(np.sqrt(np.mean(resid**2))), int(live.sum())


@dataclass(frozen=True)
class DeviationReport:
    lam: float
    scales: tuple[int, ...]
    log_fractions: tuple[float, ...]
    kappa: float
    phases: int
    delta_hat: float
    residual: float
    method: str
    grid_fractions: tuple[float, ...] = ()
    flags: frozenset[str] = field(default_factory=frozenset)

    @property
    def fractions(self) -> tuple[float, ...]:
        return tuple(math.exp(v) for v in self.log_fractions)

    @property
    def monotone(self) -> bool:
        """Non-increasing up to the sampling noise ``3 / sqrt(phases)``."""
        tol = 3.0 / math.sqrt(self.phases)
        f = self.fractions
        return all(b <= a + tol for a, b in zip(f, f[1:]))

    def running_delta(self) -> list[float]:
        """delta_hat refitted on each prefix of the scale sequence."""
        return [fit_decay(self.scales[:j], self.log_fractions[:j], self.lam)[0]
                for j in range(1, len(self.scales) + 1)]


def decay_fit(params: CocycleParams, scales, kappa: float = 0.9, phases: int = 10**5,
              seed: int = 0, method: str = "resonant") -> DeviationReport:
    """Fit the exponential decay of the deviant-set measure across scales.

    The grid fractions are always computed and returned for comparison.
    With ``method="grid"`` and every fraction zero, ``delta_hat`` is nan and
    the report carries the lower bound implied by the grid resolution in
    the flag ``delta>=...``.
    """
    scales = tuple(sorted(int(i) for i in scales))
    if len(scales) < 4 or scales[-1] < 8 * scales[0]:
        raise ValueError("need at least 4 scales spanning a factor 8")
    if method not in ("grid", "resonant"):
        raise ValueError(f"unknown method {method!r}")
    grid = tuple(grid_fractions(params, scales, kappa, phases, seed))
    flags = set()
    if params.potential.level_set(params.E / params.lam).size == 0:
        flags.add("off-spectrum")
    if method == "grid":
        with np.errstate(divide="ignore"):
            logs = tuple(float(v) for v in np.log(grid))
    else:
        logs = []
        for i in scales:
            lm, f = resonant_measure(params, i, kappa)
            logs.append(lm)
            flags |= {f"{name}@{i}" for name in f}
        logs = tuple(logs)
    delta, resid, used = fit_decay(scales, logs, params.lam)
    if used == 0:
        bound = math.log(phases) / (scales[0] * math.log(params.lam))
        flags.add(f"delta>={bound!r}")
    return DeviationReport(float(params.lam), scales, logs, kappa, phases, delta, resid,
                           method, grid, frozenset(flags))


def lambda_table(params: CocycleParams, lams, scales, **kw) -> list[DeviationReport]:
    """One decay fit per coupling, for checking that delta_hat does not depend on it."""
    return [decay_fit(params.with_(lam=float(l)), scales, **kw) for l in lams]


def preimage_distance(params: CocycleParams, x, i: int) -> np.ndarray:
    """Distance from each phase to ``{z - k alpha : v(z) = E/lam, 0 <= k < i}``."""
    from .frequency import torus_distance

    zeros = params.potential.level_set(params.E / params.lam)
    pre = np.mod(zeros[:, None] - np.arange(i)[None, :] * params.alpha, 1.0).ravel()
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return np.array([float(np.min(torus_distance(xx, pre))) for xx in x])
