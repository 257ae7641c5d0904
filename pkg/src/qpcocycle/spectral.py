"""Lyapunov exponents, integrated density of states, and the Thouless formula."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .cocycle import CocycleParams, _phases, chunk_steps, schrodinger_batch


@dataclass(frozen=True)
class LyapunovEstimate:
    E: float
    n: int
    phases: int
    value: float
    method: str
    stderr: float
    flags: frozenset[str] = field(default_factory=frozenset)
    residuals: tuple[float, ...] = ()


@dataclass(frozen=True)
class IDSEstimate:
    E: float
    n: int
    phases: int
    value: float


def phase_grid(phases: int, seed: int = 0) -> np.ndarray:
    """Uniform grid ``x0 + j/phases`` with a seeded origin in [0, 1/phases)."""
    if phases < 1:
        raise ValueError("phases must be >= 1")
    x0 = np.random.default_rng(seed).uniform(0.0, 1.0 / phases)
    return x0 + np.arange(phases) / phases


def _energies(params: CocycleParams, energies):
    if energies is None:
        return np.array([params.E]), True
    return np.atleast_1d(np.asarray(energies, dtype=float)), np.ndim(energies) == 0


def lyapunov_birkhoff(params: CocycleParams, n: int, phases: int, seed: int = 0,
                      energies=None):
    """Phase average of ``log ||A_n(x)|| / n``.

    With ``energies`` an array, returns one estimate per energy.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    es, scalar = _energies(params, energies)
    xs = phase_grid(phases, seed)
    batch, _ = schrodinger_batch(params, xs, n, energies=es)
    per = batch.log_norm().reshape(es.size, phases) / n
    sd = per.std(axis=1, ddof=1) if phases > 1 else np.zeros(es.size)
    out = [LyapunovEstimate(float(e), n, phases, float(v), "birkhoff", float(s / math.sqrt(phases)))
           for e, v, s in zip(es, per.mean(axis=1), sd)]
    return out[0] if scalar else out


def _scale_pair(params: CocycleParams, xs: np.ndarray, n: int, m: int):
    """Block log-norms ``log ||A_n||`` and ``log ||A_{2n}||`` at the m block starts."""
    starts = (xs[:, None] + n * np.arange(m)[None, :] * params.alpha).ravel() % 1.0
    _, rec = schrodinger_batch(params, starts, 2 * n, checkpoints=(n, 2 * n))
    return rec[n].reshape(xs.size, m), rec[2 * n].reshape(xs.size, m)


def lyapunov_avalanche(params: CocycleParams, n1: int, growth: float, levels: int,
                       phases: int, seed: int = 0, degenerate_share: float = 0.1) -> LyapunovEstimate:
    """Multiscale estimate ``2 L_{2n} - L_n`` at the last scale.

    At each scale the orbit segment of length ``n_{s+1}`` is cut into blocks
    of length ``n_s``; when the Avalanche Principle hypotheses fail on more
    than ``degenerate_share`` of the phases the plain Birkhoff value at the
    last scale is returned instead, flagged ``ap-degenerate``.
    """
    if n1 < 10 or not (2 <= growth <= 100) or levels < 1:
        raise ValueError("need n1 >= 10, 2 <= growth <= 100, levels >= 1")
    xs = phase_grid(phases, seed)
    scales = [n1]
    for _ in range(levels - 1):
        scales.append(int(round(growth * scales[-1])))
    m = max(3, int(round(growth)))
    L, L2, failed = {}, {}, 0.0
    for n in scales:
        one, two = _scale_pair(params, xs, n, m)
        L[n] = one[:, 0].mean() / n
        L2[n] = two[:, 0].mean() / (2 * n)
        log_mu = 0.5 * n * max(L[n], 0.0)
        pair = one[:, :-1] + one[:, 1:] - two[:, :-1]
        ok = (one.min(axis=1) >= log_mu) & (log_mu > math.log(m)) \
            & (np.abs(pair).max(axis=1) < 0.5 * log_mu)
        failed = max(failed, 1.0 - ok.mean())
    residuals = tuple(float(L[b] + L[a] - 2.0 * L2[a]) for a, b in zip(scales, scales[1:]))
    last = scales[-1]
    if failed > degenerate_share:
        batch, _ = schrodinger_batch(params, xs, last)
        per = batch.log_norm() / last
        return LyapunovEstimate(params.E, last, phases, float(per.mean()), "avalanche",
                                float(per.std(ddof=1) / math.sqrt(phases)) if phases > 1 else 0.0,
                                frozenset({"ap-degenerate"}), residuals)
    value = 2.0 * L2[last] - L[last]
    return LyapunovEstimate(params.E, last, phases, float(value), "avalanche",
                            float(abs(L2[last] - L[last])), frozenset(), residuals)


def ids_dirichlet(params: CocycleParams, E, n: int, phases: int, seed: int = 0):
    """Fraction of Dirichlet eigenvalues below E, averaged over phases.

    Counts negative pivots of ``H_n(x) - E`` for each phase (Sturm).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    es, scalar = _energies(params, E)
    xs = phase_grid(phases, seed)
    lanes = es.size * xs.size
    energy = np.repeat(es, xs.size)
    pivot = np.full(lanes, np.inf)
    count = np.zeros(lanes, dtype=np.int64)
    m0 = 0
    while m0 < n:
        steps = min(chunk_steps(lanes), n - m0)
        # sites k = 1..n sit at x + k alpha
        pot = params.lam * params.potential.v(_phases(xs, params.alpha, m0 + 1, steps))
        diag = np.ascontiguousarray(np.tile(pot, (1, es.size)))
        _kernels.sturm_advance(diag, energy, pivot, count)
        m0 += steps
    vals = count.reshape(es.size, xs.size).mean(axis=1) / n
    out = [IDSEstimate(float(e), n, phases, float(v)) for e, v in zip(es, vals)]
    return out[0] if scalar else out


def _cell_log_mean(E: float, lo: float, hi: float) -> float:
    """Average of log|E - y| over y in [lo, hi]."""
    def F(z):
        return z * math.log(abs(z)) - z if z != 0.0 else 0.0
    return (F(hi - E) - F(lo - E)) / (hi - lo)


def thouless_integral(E: float, energies, values) -> float:
    """Integral of log|E - E'| against the measure with distribution ``values``.

    Increments are placed at cell midpoints; the cell containing E and its
    neighbours use the exact cell average of the logarithm.
    """
    es = np.asarray(energies, dtype=float)
    ns = np.asarray(values, dtype=float)
    if es.size < 2 or es.shape != ns.shape:
        raise ValueError("need matching energy and IDS arrays")
    if np.any(np.diff(es) <= 0):
        raise ValueError("energy grid must be increasing")
    if np.any(np.diff(ns) < 0):
        raise ValueError("non-monotone IDS grid")
    dn = np.diff(ns)
    mid = 0.5 * (es[1:] + es[:-1])
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(E - mid))
    cell = int(np.clip(np.searchsorted(es, E) - 1, 0, es.size - 2))
    for k in range(max(cell - 1, 0), min(cell + 2, es.size - 1)):
        logs[k] = _cell_log_mean(E, es[k], es[k + 1])
    live = dn > 0
    return float(np.sum(dn[live] * logs[live]))


def thouless_check(E: float, ids_grid, min_points: int = 200) -> float:
    """Thouless integral from a list of :class:`IDSEstimate` on an increasing grid."""
    if len(ids_grid) < min_points:
        raise ValueError(f"IDS grid needs at least {min_points} points")
    es = [g.E for g in ids_grid]
    ns = [g.value for g in ids_grid]
    return thouless_integral(E, es, ns)
