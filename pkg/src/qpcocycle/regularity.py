"""Hölder exponents from the maximal modulus of continuity on a uniform grid."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cocycle import CocycleParams
from .spectral import ids_dirichlet, lyapunov_birkhoff


@dataclass(frozen=True)
class HolderFit:
    sigma_hat: float
    log_C: float
    window: tuple[float, float]
    pair_scales: tuple[float, ...]
    residual: float
    moduli: tuple[float, ...] = ()
    flags: frozenset[str] = field(default_factory=frozenset)

    @property
    def degenerate(self) -> bool:
        return "degenerate" in self.flags


def default_scales(spacing: float, count: int = 6) -> list[float]:
    """Dyadic gaps 4, 8, ... grid steps."""
    return [spacing * 2 ** (j + 2) for j in range(count)]


def modulus(values: np.ndarray, k: int) -> float:
    """``max |f(E + k dE) - f(E)|`` over grid pairs."""
    return float(np.max(np.abs(values[k:] - values[:-k])))


def holder_fit(energies, values, scales=None, noise_floor: float = 0.0,
               min_scales: int = 5) -> HolderFit:
    """Slope of ``log M(h)`` against ``log h``.

    Gaps must be whole multiples of the grid spacing.  Scales with
    ``M(h) <= 3 * noise_floor`` (or exactly zero) are dropped and flagged.
    """
    es = np.asarray(energies, dtype=float)
    vs = np.asarray(values, dtype=float)
    if es.shape != vs.shape or es.size < 2:
        raise ValueError("energies and values must be matching 1-d arrays")
    if not np.all(np.isfinite(vs)):
        raise ValueError("non-finite values")
    dE = (es[-1] - es[0]) / (es.size - 1)
    if not np.allclose(np.diff(es), dE, rtol=1e-9, atol=0):
        raise ValueError("energy grid must be uniform")
    scales = default_scales(dE) if scales is None else list(scales)
    if len(scales) < min_scales:
        raise ValueError(f"need at least {min_scales} scales")
    flags = set()
    used, ms = [], []
    for h in scales:
        k = round(h / dE)
        if abs(k * dE - h) > 1e-6 * h or k < 4 or k >= es.size:
            raise ValueError(f"gap {h!r} must be a multiple >= 4 of the spacing {dE!r}")
        m = modulus(vs, k)
        if m <= 3.0 * noise_floor or m == 0.0:
            flags.add(f"dropped:{float(h)!r}")
            continue
        used.append(k * dE)
        ms.append(m)
    window = (float(es[0]), float(es[-1]))
    if len(used) < 2:
        flags.add("degenerate")
        return HolderFit(math.nan, math.nan, window, tuple(used), math.nan, tuple(ms),
                         frozenset(flags))
    lh, lm = np.log(used), np.log(ms)
    slope, icpt = np.polyfit(lh, lm, 1)
    resid = float(np.sqrt(np.mean((lm - (slope * lh + icpt)) ** 2)))
    return HolderFit(float(slope), float(icpt), window, tuple(used), resid, tuple(ms),
                     frozenset(flags))


@dataclass(frozen=True)
class JointReport:
    lyapunov: HolderFit
    ids: HolderFit
    energies: np.ndarray
    L: np.ndarray
    N: np.ndarray

    @property
    def cross_check(self) -> bool | None:
        """Exponents of L and N within 0.25 of each other (None when either is degenerate)."""
        if self.lyapunov.degenerate or self.ids.degenerate:
            return None
        return abs(self.lyapunov.sigma_hat - self.ids.sigma_hat) <= 0.25


def joint_report(params: CocycleParams, window, grid: int = 400, n: int = 10**5,
                 phases: int = 16, ids_n: int | None = None, seed: int = 0,
                 require_spectrum: bool = True, bias: float = 1.0) -> JointReport:
    """Hölder fits of ``E -> L(E)`` and ``E -> N(E)`` on a window.

    The noise floor for L is the largest phase standard error plus
    ``bias / n`` (finite-n bias, largest in elliptic regions); for N it is
    one eigenvalue count per phase average, ``1 / (ids_n * phases)``.
    """
    lo, hi = window
    es = np.linspace(lo, hi, grid)
    ids_n = n if ids_n is None else ids_n
    N = np.array([e.value for e in ids_dirichlet(params, es, ids_n, phases, seed)])
    if require_spectrum and N[-1] <= N[0]:
        raise ValueError("vacuous window: L locally constant")
    ests = lyapunov_birkhoff(params, n, phases, seed, energies=es)
    L = np.array([e.value for e in ests])
    floor_L = max(e.stderr for e in ests) + bias / n
    fit_L = holder_fit(es, L, noise_floor=floor_L)
    fit_N = holder_fit(es, N, noise_floor=1.0 / (ids_n * phases))
    return JointReport(fit_L, fit_N, es, L, N)
