"""SL(2,R) cocycles over an irrational rotation.

Long products are carried as ``exp(acc) * M`` with ``M`` of moderate size,
so no entry ever overflows.  Because every factor has determinant one,
``det M = exp(-2 acc)`` is known analytically and the operator norm is read
off the closed form for 2x2 matrices instead of the cancellation-prone
``ad - bc``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import _kernels
from .frequency import Frequency, golden

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi
DEFAULT_CAP = 10**8
CHUNK = 2048
CHUNK_CELLS = 1 << 22  # lanes * steps held in memory per chunk
ISOTROPY_TOL = 1e-12


# ---------------------------------------------------------------------------
# potentials


@dataclass(frozen=True)
class PotentialSpec:
    """Potential ``v`` on the circle with first and second derivatives."""

    kind: str
    eps2: float = 0.0
    table: tuple[float, ...] = ()
    _spline: CubicSpline | None = field(default=None, repr=False, compare=False)

    def v(self, x):
        x = np.mod(x, 1.0)
        if self.kind == "tabulated":
            return self._spline(x)
        out = 2.0 * np.cos(TWO_PI * x)
        if self.eps2:
            out = out + self.eps2 * np.cos(2.0 * TWO_PI * x)
        return out

    def dv(self, x):
        x = np.mod(x, 1.0)
        if self.kind == "tabulated":
            return self._spline(x, 1)
        out = -2.0 * TWO_PI * np.sin(TWO_PI * x)
        if self.eps2:
            out = out - 2.0 * TWO_PI * self.eps2 * np.sin(2.0 * TWO_PI * x)
        return out

    def d2v(self, x):
        x = np.mod(x, 1.0)
        if self.kind == "tabulated":
            return self._spline(x, 2)
        out = -2.0 * TWO_PI**2 * np.cos(TWO_PI * x)
        if self.eps2:
            out = out - 4.0 * TWO_PI**2 * self.eps2 * np.cos(2.0 * TWO_PI * x)
        return out

    def critical_points(self, grid: int = 2**14) -> np.ndarray:
        """Zeros of v' located by sign changes on a uniform grid, then refined."""
        return _circle_roots(self.dv, grid)

    def check_cos_type(self, grid: int = 2**14, floor: float = 1e-6) -> None:
        crit = self.critical_points(grid)
        if crit.size != 2:
            raise ValueError(f"potential has {crit.size} critical points, expected 2")
        curv = np.abs(self.d2v(crit))
        if np.any(curv <= floor):
            raise ValueError("degenerate critical point: |v''| below floor")

    def level_set(self, level: float, grid: int = 2**14) -> np.ndarray:
        """Points x with v(x) = level."""
        return _circle_roots(lambda x: self.v(x) - level, grid)


def _circle_roots(fn, grid: int) -> np.ndarray:
    from scipy.optimize import brentq

    xs = np.arange(grid + 1) / grid
    vals = fn(xs)
    roots = []
    for j in range(grid):
        f0, f1 = vals[j], vals[j + 1]
        if f0 == 0.0:
            roots.append(xs[j])
        elif f0 * f1 < 0.0:
            roots.append(brentq(fn, xs[j], xs[j + 1], xtol=1e-15, rtol=1e-15))
    return np.mod(np.array(roots), 1.0)


def amo() -> PotentialSpec:
    return PotentialSpec("amo")


def cos_deformed(eps2: float) -> PotentialSpec:
    return PotentialSpec("cos_deformed", eps2=float(eps2))


def tabulated(values) -> PotentialSpec:
    """Periodic cubic spline through ``values`` sampled at ``j / len(values)``."""
    vals = np.asarray(values, dtype=float)
    if vals.ndim != 1 or vals.size < 4:
        raise ValueError("need a 1-d table with at least 4 samples")
    xs = np.arange(vals.size + 1) / vals.size
    spline = CubicSpline(xs, np.append(vals, vals[0]), bc_type="periodic")
    return PotentialSpec("tabulated", table=tuple(vals), _spline=spline)


def potential_from_spec(text: str) -> PotentialSpec:
    """Parse ``amo``, ``cosdef:eps2=<e>`` or ``table:file=<path>``."""
    text = text.strip()
    if text == "amo":
        return amo()
    kind, _, rest = text.partition(":")
    opts = dict(kv.split("=", 1) for kv in rest.split(",") if kv)
    if kind == "cosdef" and "eps2" in opts:
        return cos_deformed(float(opts["eps2"]))
    if kind == "table" and "file" in opts:
        return tabulated(np.loadtxt(opts["file"], ndmin=1))
    raise ValueError(f"bad potential spec {text!r}")


# ---------------------------------------------------------------------------
# parameters and single matrices


@dataclass(frozen=True)
class CocycleParams:
    potential: PotentialSpec = field(default_factory=amo)
    lam: float = 1.0
    E: float = 0.0
    freq: Frequency = field(default_factory=golden)

    def __post_init__(self):
        # lam = 0 is the free operator, which the spectral checks rely on
        if self.lam < 0:
            raise ValueError("coupling must be >= 0")

    @property
    def alpha(self) -> float:
        return self.freq.value

    @property
    def t(self) -> float:
        return self.E / self.lam

    def with_(self, **kw) -> "CocycleParams":
        return CocycleParams(**{**self.__dict__, **kw})


def step_matrix(params: CocycleParams, x: float) -> np.ndarray:
    e = params.E - params.lam * float(params.potential.v(x))
    return np.array([[e, -1.0], [1.0, 0.0]])


def rotation(theta) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def model_amplitude(params: CocycleParams, x, amplitude: str = "constant"):
    if amplitude == "constant":
        return np.full(np.shape(x), float(params.lam))
    if amplitude == "schrodinger":
        # conjugating the step matrix by diag(sqrt(lam), 1/sqrt(lam)) gives this
        w = params.t - params.potential.v(x)
        return params.lam * np.sqrt(1.0 + w * w)
    raise ValueError(f"unknown amplitude profile {amplitude!r}")


def model_entries(params: CocycleParams, x, amplitude: str = "constant"):
    """Entries of ``diag(l, 1/l) R_phi`` with ``cot phi = t - v(x)``."""
    if params.lam <= 0:
        raise ValueError("model cocycle needs coupling > 0")
    w = params.t - params.potential.v(x)
    phi = HALF_PI - np.arctan(w)
    lam = model_amplitude(params, x, amplitude)
    c, s = np.cos(phi), np.sin(phi)
    return lam * c, -lam * s, s / lam, c / lam


def model_cocycle(params: CocycleParams, x: float, amplitude: str = "constant") -> np.ndarray:
    m11, m12, m21, m22 = (float(v) for v in model_entries(params, x, amplitude))
    return np.array([[m11, m12], [m21, m22]])


# ---------------------------------------------------------------------------
# polar decomposition


@dataclass(frozen=True)
class PolarData:
    log_norm: float
    u: float
    s: float
    sign: float = 1.0

    def reconstruct(self) -> np.ndarray:
        sig = math.exp(self.log_norm)
        return self.sign * rotation(self.u) @ np.diag([sig, 1.0 / sig]) @ rotation(HALF_PI - self.s)


def polar_angles(a, b, c, d):
    """Unstable and stable directions in [0, pi) for (a batch of) 2x2 matrices.

    Only ratios of entries matter, so scaled products can be passed as is.
    """
    u = 0.5 * np.arctan2(2.0 * (a * c + b * d), (a * a + b * b) - (c * c + d * d))
    s = 0.5 * np.arctan2(2.0 * (a * b + c * d), (a * a + c * c) - (b * b + d * d)) + HALF_PI
    return np.mod(u, math.pi), np.mod(s, math.pi)


def log_norm_scaled(a, b, c, d, acc):
    """log of the operator norm of ``exp(acc) * [[a, b], [c, d]]`` on SL(2)."""
    t = a * a + b * b + c * c + d * d
    det2 = np.exp(np.minimum(-4.0 * acc, 700.0))
    disc = np.sqrt(np.maximum(t * t - 4.0 * det2, 0.0))
    return acc + 0.5 * np.log(0.5 * (t + disc))


def polar(A) -> PolarData:
    A = np.asarray(A, dtype=float)
    a, b, c, d = A[0, 0], A[0, 1], A[1, 0], A[1, 1]
    log_norm = float(log_norm_scaled(a, b, c, d, 0.0))
    if log_norm <= math.log1p(ISOTROPY_TOL):
        raise ValueError("isotropic matrix: directions undefined")
    u, s = (float(v) for v in polar_angles(a, b, c, d))
    recon = PolarData(log_norm, u, s).reconstruct()
    sign = 1.0 if np.sum(recon * A) >= 0 else -1.0
    return PolarData(log_norm, u, s, sign)


def rp1_reduce(theta):
    """Representative of ``theta mod pi`` in (-pi/2, pi/2]."""
    r = np.mod(np.asarray(theta, dtype=float) + HALF_PI, math.pi) - HALF_PI
    return np.where(r == -HALF_PI, HALF_PI, r)


def rp1_distance(a, b):
    return np.abs(rp1_reduce(np.asarray(a) - np.asarray(b)))


# ---------------------------------------------------------------------------
# batched products


@dataclass
class ProductBatch:
    """Lanes of products ``exp(acc) * [[a, b], [c, d]]``."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    acc: np.ndarray

    @classmethod
    def identity(cls, lanes: int) -> "ProductBatch":
        return cls(np.ones(lanes), np.zeros(lanes), np.zeros(lanes), np.ones(lanes), np.zeros(lanes))

    def log_norm(self) -> np.ndarray:
        return log_norm_scaled(self.a, self.b, self.c, self.d, self.acc)

    def angles(self):
        return polar_angles(self.a, self.b, self.c, self.d)

    def normalized(self):
        """Entries rescaled to unit operator norm, plus the log-norm."""
        ln = self.log_norm()
        f = np.exp(self.acc - ln)
        return self.a * f, self.b * f, self.c * f, self.d * f, ln


def chunk_steps(lanes: int) -> int:
    return max(1, min(CHUNK, CHUNK_CELLS // max(lanes, 1)))


def _phases(x0: np.ndarray, alpha: float, m0: int, steps: int) -> np.ndarray:
    k = np.arange(m0, m0 + steps, dtype=float)[:, None]
    return np.mod(x0[None, :] + k * alpha, 1.0)


def _lengths(lengths, lanes: int, n: int) -> np.ndarray:
    if lengths is None:
        return np.full(lanes, n, dtype=np.int64)
    out = np.broadcast_to(np.asarray(lengths, dtype=np.int64), (lanes,)).copy()
    if np.any(out < 0) or np.any(out > n):
        raise ValueError("per-lane lengths must lie in [0, n]")
    return out


def schrodinger_batch(params: CocycleParams, x0, n: int, energies=None, lengths=None,
                      checkpoints=(), cap: int = DEFAULT_CAP):
    """Forward transfer-matrix products ``A_n(x0)`` for many lanes at once.

    ``x0`` has shape ``(P,)``.  If ``energies`` (shape ``(K,)``) is given the
    lanes are the ``K * P`` pairs, energy-major.  ``lengths`` optionally
    stops each lane early.  Returns the final :class:`ProductBatch` and a
    dict mapping each checkpoint step count to the log-norms at that step.
    """
    if n < 0 or n > cap:
        raise ValueError(f"n={n} outside [0, {cap}]")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    es = np.atleast_1d(np.asarray(params.E if energies is None else energies, dtype=float))
    lanes = es.size * x0.size
    state = ProductBatch.identity(lanes)
    stop = _lengths(lengths, lanes, n)
    marks = sorted({int(c) for c in checkpoints if 0 < c <= n})
    recorded = {}
    bounds = sorted(set(marks) | {n})
    m0 = 0
    for target in bounds:
        while m0 < target:
            steps = min(chunk_steps(lanes), target - m0)
            pot = params.lam * params.potential.v(_phases(x0, params.alpha, m0, steps))
            e = (es[None, :, None] - pot[:, None, :]).reshape(steps, lanes)
            _kernels.schrodinger_advance(state.a, state.b, state.c, state.d, state.acc,
                                         np.ascontiguousarray(e), stop, m0)
            m0 += steps
        if target in marks:
            recorded[target] = state.log_norm()
    return state, recorded


def model_batch(params: CocycleParams, x0, n: int, lengths=None, amplitude: str = "constant",
                cap: int = DEFAULT_CAP) -> ProductBatch:
    """Forward products of the model cocycle, one lane per entry of ``x0``."""
    if n < 0 or n > cap:
        raise ValueError(f"n={n} outside [0, {cap}]")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    state = ProductBatch.identity(x0.size)
    stop = _lengths(lengths, x0.size, n)
    m0 = 0
    while m0 < n:
        steps = min(chunk_steps(x0.size), n - m0)
        xs = _phases(x0, params.alpha, m0, steps)
        m11, m12, m21, m22 = (np.ascontiguousarray(v) for v in model_entries(params, xs, amplitude))
        _kernels.matrix_advance(state.a, state.b, state.c, state.d, state.acc,
                                m11, m12, m21, m22, stop, m0)
        m0 += steps
    return state


# ---------------------------------------------------------------------------
# single-orbit products


@dataclass(frozen=True)
class OrbitProduct:
    """``A_n(x) = exp(log_norm) * matrix`` with ``matrix`` of unit norm."""

    log_norm: float
    matrix: np.ndarray
    n: int
    x: float
    s: float
    u: float

    def full(self) -> np.ndarray:
        if self.log_norm > 700:
            raise OverflowError("product too large to form explicitly")
        return math.exp(self.log_norm) * self.matrix

    def polar(self) -> PolarData:
        if self.log_norm <= math.log1p(ISOTROPY_TOL):
            raise ValueError("isotropic matrix: directions undefined")
        return PolarData(self.log_norm, self.u, self.s)


def _orbit_from_entries(a, b, c, d, log_norm, n, x) -> OrbitProduct:
    u, s = polar_angles(a, b, c, d)
    return OrbitProduct(float(log_norm), np.array([[a, b], [c, d]], dtype=float),
                        int(n), float(x), float(s), float(u))


def orbit_product(params: CocycleParams, x: float, n: int, model: bool = False,
                  amplitude: str = "constant", cap: int = DEFAULT_CAP) -> OrbitProduct:
    """``A_n(x)``; for ``n < 0`` this is ``A_{-n}(x + n alpha)^{-1}``."""
    if abs(n) > cap:
        raise ValueError(f"|n|={abs(n)} exceeds cap {cap}")
    x = float(x) % 1.0
    if n == 0:
        return OrbitProduct(0.0, np.eye(2), 0, x, HALF_PI, 0.0)
    start = x if n > 0 else (x + n * params.alpha) % 1.0
    if model:
        batch = model_batch(params, [start], abs(n), amplitude=amplitude, cap=cap)
    else:
        batch, _ = schrodinger_batch(params, [start], abs(n), cap=cap)
    a, b, c, d, ln = (float(v[0]) for v in batch.normalized())
    if n < 0:
        a, b, c, d = d, -b, -c, a  # adjugate; same norm
    return _orbit_from_entries(a, b, c, d, ln, n, x)


def combine(first: OrbitProduct, second: OrbitProduct) -> OrbitProduct:
    """Product ``second @ first`` (first applied first) in log-space."""
    M = second.matrix @ first.matrix
    acc = first.log_norm + second.log_norm
    ln = float(log_norm_scaled(M[0, 0], M[0, 1], M[1, 0], M[1, 1], acc))
    M = M * math.exp(acc - ln)
    return _orbit_from_entries(M[0, 0], M[0, 1], M[1, 0], M[1, 1], ln,
                               first.n + second.n, first.x)

