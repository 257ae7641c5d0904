"""Critical-point induction for the angle functions of a hyperbolic cocycle.

Level ``i`` of the induction lives at the convergent denominator ``q_i``.
Its critical set ``C^(i)`` (one or two points) carries intervals of radius
``q_i**-2``.  From the first returns ``r^+``/``r^-`` of the rotation to these
intervals we form

    g_{i+1}(x) = s(A_{r^+}(x)) - u(A_{r^-}(x - r^- alpha)),

the angle between the contracting direction of the forward return and the
expanding direction of the backward return, and take its minima as
``C^(i+1)``.

The cocycle used here is the model ``diag(l(x), 1/l(x)) R_phi(x)`` with
``cot phi = t - v``.  By default ``l(x) = lam * sqrt(1 + (t - v)^2)``, the
amplitude obtained by conjugating the Schrodinger step by
``diag(sqrt(lam), 1/sqrt(lam))``; the initial angle function is
``arctan(t - v)`` for any amplitude profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .cocycle import HALF_PI, CocycleParams, model_batch, rp1_reduce
from .frequency import Frequency, torus_distance


@dataclass(frozen=True)
class InductionConfig:
    eps: float = 1e-3
    growth_exponent: float = 0.9
    raw_growth_exponent: float = 1.0 - 1e-5
    drift_exponent: float = 0.5
    q_start: int = 13
    q_cap: int = 10**4
    refine_tol: float = 1e-12
    angle_floor: float = 1e-12
    c_floor: float = 1e-3
    type1_power: float = 4.0
    type2_curvature: float = 1e-2
    amplitude: str = "schrodinger"

    def threshold(self, q: int) -> int:
        return max(1, math.ceil(1e-3 * self.eps * q))


DEFAULT_CONFIG = InductionConfig()


@dataclass(frozen=True)
class CriticalSet:
    level: int
    points: tuple[float, ...]
    radius: float
    q: int
    flags: frozenset[str] = field(default_factory=frozenset)

    def distance(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.min([torus_distance(x, c) for c in self.points], axis=0)

    def contains(self, x) -> np.ndarray:
        return self.distance(x) < self.radius

    def samples(self, per_point: int) -> np.ndarray:
        """Uniform samples strictly inside each interval."""
        offs = (np.arange(per_point) + 0.5) / per_point * 2.0 - 1.0
        return np.concatenate([np.mod(c + self.radius * offs, 1.0) for c in self.points])


@dataclass(frozen=True)
class ReturnTimes:
    level: int
    x: np.ndarray
    r_plus: np.ndarray
    r_minus: np.ndarray

    @property
    def r_plus_min(self) -> int:
        return int(self.r_plus.min())

    @property
    def r_minus_min(self) -> int:
        return int(self.r_minus.min())

    @property
    def r(self) -> int:
        return min(self.r_plus_min, self.r_minus_min)


@dataclass
class AngleFunctionData:
    level: int
    centers: tuple[float, ...]
    radius: float
    grid: list[np.ndarray]
    g_values: list[np.ndarray]
    case: str
    type_tags: tuple[str, ...] = ()
    resonance_k: int | None = None
    l_k: float | None = None
    critical_points: tuple[float, ...] = ()
    flags: set[str] = field(default_factory=set)
    fn: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)

    def evaluate(self, x) -> np.ndarray:
        """g at arbitrary points: exact when an evaluator is attached, else interpolated."""
        x = np.asarray(x, dtype=float)
        if self.fn is not None:
            return self.fn(x)
        out = np.full(x.shape, np.nan)
        for xs, gs in zip(self.grid, self.g_values):
            off = rp1_reduce(np.pi * (x - xs[0])) / np.pi  # signed torus offset
            inside = (off >= 0) & (off <= xs[-1] - xs[0])
            out[inside] = np.interp(xs[0] + off[inside], xs, gs)
        return out


# ---------------------------------------------------------------------------
# helpers


def rp1_abs(g) -> np.ndarray:
    """Distance of an angle to the zero class in RP^1."""
    return np.abs(rp1_reduce(g))


def unwrap(g: np.ndarray) -> np.ndarray:
    """Nearest-branch continuation of RP^1 samples, anchored near zero."""
    out = np.unwrap(rp1_reduce(g), period=math.pi)
    j = int(np.argmin(rp1_abs(out)))
    return out - math.pi * round(out[j] / math.pi)


def _refine_min(fn, xs: np.ndarray, vals: np.ndarray, j: int, tol: float) -> float:
    """Golden-section refinement of a grid minimum of ``|g|`` in RP^1."""
    if j == 0 or j == xs.size - 1:
        return float(xs[j])
    res = minimize_scalar(lambda t: float(rp1_abs(fn(np.array([t])))[0]),
                          bracket=(xs[j - 1], xs[j], xs[j + 1]), method="golden",
                          options={"xtol": tol})
    return float(res.x) % 1.0


def classify_case(points, radius: float, alpha: float, k_limit: float) -> tuple[str, int | None]:
    """Case II (intervals merge), III (a short translate overlaps), else I."""
    if len(points) < 2 or torus_distance(points[0], points[1]) < 2.0 * radius:
        return "II", None
    kmax = int(math.ceil(k_limit)) - 1
    for k in range(1, kmax + 1):
        for sgn in (k, -k):
            if torus_distance(points[0] + sgn * alpha, points[1]) < 2.0 * radius:
                return "III", sgn
    return "I", None


# ---------------------------------------------------------------------------
# initial level


def initial_angle(params: CocycleParams, grid_size: int = 2**12, level: int | None = None,
                  config: InductionConfig = DEFAULT_CONFIG) -> AngleFunctionData:
    """``g_N = arctan(t - v)`` on a grid over the whole circle."""
    if params.lam <= 0:
        raise ValueError("coupling must be > 0")
    t = params.t

    def fn(x):
        return np.arctan(t - params.potential.v(x))

    xs = np.arange(grid_size) / grid_size
    gs = fn(xs)
    a = rp1_abs(gs)
    is_min = (a <= np.roll(a, 1)) & (a < np.roll(a, -1))
    idx = np.nonzero(is_min)[0]
    idx = idx[np.argsort(a[idx])]
    flags = set()
    if idx.size < 2:
        flags.add("tangency")
    if idx.size > 2:
        flags.add("extra-minima")
    pts = []
    for j in idx[:2]:
        lo, mid, hi = xs[j] - 1.0 / grid_size, xs[j], xs[j] + 1.0 / grid_size
        res = minimize_scalar(lambda y: float(rp1_abs(fn(np.array([y])))[0]),
                              bracket=(lo, mid, hi), method="golden",
                              options={"xtol": config.refine_tol})
        pts.append(float(res.x) % 1.0)
    pts.sort()
    if level is None:
        level = params.freq.first_index_at_least(config.q_start)
    radius = params.freq.q[level] ** -2.0
    case, k = classify_case(pts, radius, params.alpha, config.threshold(params.freq.q[level]))
    return AngleFunctionData(level, tuple(pts), radius, [xs], [gs], case,
                             resonance_k=k, critical_points=tuple(pts), flags=flags, fn=fn)


def critical_set(afd: AngleFunctionData, freq: Frequency, level: int | None = None) -> CriticalSet:
    level = afd.level if level is None else level
    q = freq.q[level]
    return CriticalSet(level, afd.critical_points, q ** -2.0, q, frozenset(afd.flags))


# ---------------------------------------------------------------------------
# return times


def return_limit(freq: Frequency, radius: float) -> int:
    """Every orbit segment of length ``q_m + q_{m+1}`` is ``1/q_m``-dense, so this
    many steps always reach a ball of the given radius."""
    qs = freq.q
    for m in range(len(qs) - 1):
        if qs[m] * radius > 1.0:
            return qs[m] + qs[m + 1]
    raise ValueError("not enough convergents to bound return times")


def return_times(freq: Frequency, crit: CriticalSet, x_samples,
                 config: InductionConfig = DEFAULT_CONFIG, chunk: int = 4096) -> ReturnTimes:
    """First forward and backward returns to the critical intervals past the threshold."""
    x = np.asarray(x_samples, dtype=float)
    if not np.all(crit.contains(x)):
        raise ValueError("samples must lie inside the critical intervals")
    k_limit = return_limit(freq, crit.radius)
    alpha = freq.value
    thr = config.threshold(crit.q)
    out = []
    for sign in (1, -1):
        found = np.zeros(x.size, dtype=np.int64)
        j0 = thr
        while np.any(found == 0):
            if j0 > k_limit:
                raise RuntimeError("return-time overflow")
            js = np.arange(j0, min(j0 + chunk, k_limit + 1))
            todo = np.nonzero(found == 0)[0]
            pos = x[todo, None] + sign * js[None, :] * alpha
            hit = crit.contains(pos)
            any_hit = hit.any(axis=1)
            found[todo[any_hit]] = js[np.argmax(hit[any_hit], axis=1)]
            j0 += chunk
        out.append(found)
    return ReturnTimes(crit.level, x, out[0], out[1])


# ---------------------------------------------------------------------------
# angle functions


def angle_evaluator(params: CocycleParams, r_plus: int, r_minus: int,
                    amplitude: str = "schrodinger"):
    """``x -> (g(x), min log-norm)`` for fixed return times."""
    alpha = params.alpha

    def evaluate(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        fwd = model_batch(params, x, r_plus, amplitude=amplitude)
        back = model_batch(params, np.mod(x - r_minus * alpha, 1.0), r_minus, amplitude=amplitude)
        s = fwd.angles()[1]
        u = back.angles()[0]
        return rp1_reduce(s - u), np.minimum(fwd.log_norm(), back.log_norm())

    return evaluate


def angle_function(params: CocycleParams, crit: CriticalSet, rt: ReturnTimes, grid_size: int = 2**10,
                   config: InductionConfig = DEFAULT_CONFIG) -> AngleFunctionData:
    """Sample ``g_{i+1}`` on each critical interval and locate its minima."""
    ev = angle_evaluator(params, rt.r_plus_min, rt.r_minus_min, config.amplitude)

    def fn(x):
        return ev(x)[0]

    grids, values, pts = [], [], []
    offs = np.linspace(-1.0, 1.0, grid_size) * crit.radius * (1.0 - 1.0 / grid_size)
    for c in crit.points:
        xs = c + offs  # kept unreduced so the grid is increasing
        g, ln = ev(xs)
        if np.any(ln <= 0.0):
            bad = float(xs[np.argmax(ln <= 0.0)] % 1.0)
            raise ArithmeticError(f"non-hyperbolic product at x={bad!r}")
        g = unwrap(g)
        grids.append(xs)
        values.append(g)
        j = int(np.argmin(rp1_abs(g)))
        pts.append(_refine_min(fn, xs, g, j, config.refine_tol))
    case, k = classify_case(crit.points, crit.radius, params.alpha, config.threshold(crit.q))
    afd = AngleFunctionData(crit.level, crit.points, crit.radius, grids, values, case,
                            resonance_k=k, critical_points=tuple(pts), fn=fn)
    if grid_size >= 2**10:
        afd.type_tags = tuple(type_classify(afd, crit.q, config, segment=j)
                              for j in range(len(grids)))
    else:
        afd.type_tags = ("unclassified",) * len(grids)
    if any(torus_distance(p, c) > crit.radius for p, c in zip(pts, crit.points)):
        afd.flags.add("minimum-on-boundary")
    return afd


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class GrowthReport:
    log_norm_plus: np.ndarray
    log_norm_minus: np.ndarray
    r_plus: np.ndarray
    r_minus: np.ndarray
    log_lam: float
    exponent: float
    raw_exponent: float

    def _margin(self, exponent):
        need_p = exponent * self.r_plus * self.log_lam
        need_m = exponent * self.r_minus * self.log_lam
        return np.minimum(self.log_norm_plus - need_p, self.log_norm_minus - need_m)

    @property
    def margin(self) -> np.ndarray:
        return self._margin(self.exponent)

    @property
    def raw_margin(self) -> np.ndarray:
        return self._margin(self.raw_exponent)

    @property
    def passed(self) -> np.ndarray:
        # at lam <= 1 the bound is vacuous, so nothing counts as growth
        return (self.margin >= 0.0) & (self.log_lam > 0.0)

    @property
    def pass_fraction(self) -> float:
        return float(np.mean(self.passed))

    @property
    def all_pass(self) -> bool:
        return bool(np.all(self.passed))


def _log_norms_by_length(params, starts, lengths, amplitude):
    out = np.empty(starts.size)
    for r in np.unique(lengths):
        sel = lengths == r
        out[sel] = model_batch(params, starts[sel], int(r), amplitude=amplitude).log_norm()
    return out


def verify_growth(params: CocycleParams, crit: CriticalSet, rt: ReturnTimes,
                  config: InductionConfig = DEFAULT_CONFIG) -> GrowthReport:
    """Growth of the forward and backward returns at every sample."""
    x = rt.x
    plus = _log_norms_by_length(params, x, rt.r_plus, config.amplitude)
    minus = _log_norms_by_length(params, np.mod(x - rt.r_minus * params.alpha, 1.0),
                                 rt.r_minus, config.amplitude)
    return GrowthReport(plus, minus, rt.r_plus, rt.r_minus, math.log(params.lam),
                        config.growth_exponent, config.raw_growth_exponent)


@dataclass(frozen=True)
class NondegeneracyReport:
    c_fit: float
    c_floor: float
    exclusion: float
    failure_region: tuple[float, float] | None

    @property
    def passed(self) -> bool:
        return self.c_fit >= self.c_floor


def nondegeneracy_check(afd: AngleFunctionData, crit_next, exclusion: float,
                        c_floor: float = DEFAULT_CONFIG.c_floor) -> NondegeneracyReport:
    """Largest c with ``|g| >= c dist(x, C_next)^3`` away from the old centers."""
    nxt = np.asarray(crit_next.points if isinstance(crit_next, CriticalSet) else crit_next)
    xs = np.concatenate(afd.grid)
    gs = np.concatenate(afd.g_values)
    far = np.min([torus_distance(xs, c) for c in afd.centers], axis=0) >= exclusion
    dist = np.min([torus_distance(xs, c) for c in nxt], axis=0)
    use = far & (dist > 0)
    ratio = rp1_abs(gs[use]) / dist[use] ** 3
    if ratio.size == 0:
        return NondegeneracyReport(math.inf, c_floor, exclusion, None)
    bad = xs[use][ratio < c_floor]
    region = (float(bad.min()), float(bad.max())) if bad.size else None
    return NondegeneracyReport(float(ratio.min()), c_floor, exclusion, region)


def type_classify(afd: AngleFunctionData, q_n: int, config: InductionConfig = DEFAULT_CONFIG,
                  segment: int = 0) -> str:
    """Slope/curvature tag of one segment: I_plus, I_minus, II, III or unclassified."""
    if afd.resonance_k is not None and afd.l_k is not None:
        return "III"
    xs, gs = afd.grid[segment], unwrap(afd.g_values[segment])
    if xs.size < 2**10:
        raise ValueError("type classification needs at least 2**10 grid points")
    d1 = np.gradient(gs, xs)
    d2 = np.gradient(d1, xs)
    n = xs.size
    half = slice(n // 4, n - n // 4)
    slope_floor = float(q_n) ** -config.type1_power
    if np.all(d1[half] > slope_floor):
        return "I_plus"
    if np.all(d1[half] < -slope_floor):
        return "I_minus"
    flat = np.abs(d1) < slope_floor
    if np.any(flat) and np.all(np.abs(d2[flat]) > config.type2_curvature):
        return "II"
    return "unclassified"


# ---------------------------------------------------------------------------
# resonant composition and bifurcation


def compose_resonant(f_shift, f_here, l_k: float):
    """``arctan(l^2 tan f_shift) - pi/2 + f_here`` as an RP^1 value, finite at tan poles."""
    first = np.arctan2(l_k * l_k * np.sin(f_shift), np.cos(f_shift))
    return rp1_reduce(first - HALF_PI + f_here)


def resonant_update(g_i: AngleFunctionData, k: int, l_k: float, alpha: float,
                    grid_size: int | None = None) -> AngleFunctionData:
    """Case III update: first segment uses ``x + k alpha``, second ``x - k alpha``."""
    if g_i.case != "III" or g_i.resonance_k != k:
        raise ValueError("resonant update needs a Case III level with matching k")
    grids, values = [], []
    for j, xs in enumerate(g_i.grid):
        if grid_size is not None and grid_size != xs.size:
            xs = np.linspace(xs[0], xs[-1], grid_size)
        shift = k * alpha if j == 0 else -k * alpha
        grids.append(xs)
        values.append(unwrap(compose_resonant(g_i.evaluate(xs + shift), g_i.evaluate(xs), l_k)))

    def fn(x, _g=g_i):
        x = np.asarray(x, dtype=float)
        seg = np.argmin([torus_distance(x, c) for c in _g.centers], axis=0)
        shift = np.where(seg == 0, k * alpha, -k * alpha)
        return compose_resonant(_g.evaluate(x + shift), _g.evaluate(x), l_k)

    out = AngleFunctionData(g_i.level + 1, g_i.centers, g_i.radius, grids, values, "III",
                            resonance_k=k, l_k=l_k, fn=fn)
    out.type_tags = ("III",) * len(grids)
    return out


@dataclass(frozen=True)
class BifurcationReport:
    d: float
    l_k: float
    zero_count: int
    d0_estimate: float
    min_abs: float
    location_error: float


def planted_pair(slope_plus: float, slope_minus: float, d: float, k: int, alpha: float,
                 c1: float = 0.25, radius: float = 0.05) -> AngleFunctionData:
    """Affine g with a type I_- piece at c1 and a type I_+ piece at c1 + k alpha + d."""
    c2 = (c1 + k * alpha + d) % 1.0

    def fn(x):
        x = np.asarray(x, dtype=float)
        d1 = rp1_reduce(np.pi * (x - c1)) / np.pi
        d2 = rp1_reduce(np.pi * (x - c2)) / np.pi
        return np.where(np.abs(d1) <= np.abs(d2), -slope_minus * d1, slope_plus * d2)

    grids = [c + np.linspace(-radius, radius, 2**10) for c in (c1, c2)]
    return AngleFunctionData(0, (c1, c2), radius, grids, [fn(g) for g in grids], "III",
                             resonance_k=k, fn=fn)


def _lift(g: AngleFunctionData, k: int, l_k: float, alpha: float):
    """Real-valued lift of the Case III composition on the first segment.

    Continuous wherever ``g`` and ``g(. + k alpha)`` are, so zeros in RP^1 are
    exactly the crossings of multiples of pi.
    """
    def H(x):
        fs = g.evaluate(x + k * alpha)
        return np.arctan2(l_k * l_k * np.sin(fs), np.cos(fs)) - HALF_PI + g.evaluate(x)
    return H


def _crossings(H, xs) -> tuple[int, np.ndarray]:
    """Crossings of ``H`` through ``pi Z`` on the grid, with brentq-refined locations."""
    vals = H(xs)
    branch = np.floor(vals / np.pi)
    jumps = np.nonzero(branch[1:] != branch[:-1])[0]
    zeros = []
    for j in jumps:
        lo, hi = min(branch[j], branch[j + 1]), max(branch[j], branch[j + 1])
        for m in np.arange(lo + 1, hi + 1):
            zeros.append(brentq(lambda t: float(H(np.array([t]))[0]) - m * np.pi,
                                xs[j], xs[j + 1], xtol=1e-15))
    return len(zeros), np.array(zeros)


def _min_gap(H, xs) -> tuple[float, float]:
    """Minimum distance of ``H`` to ``pi Z`` (that is, of ``|g|`` in RP^1)."""
    def dist(t):
        return rp1_abs(H(np.atleast_1d(t)))
    av = dist(xs)
    j = int(np.argmin(av))
    if 0 < j < xs.size - 1:
        res = minimize_scalar(lambda t: float(dist(t)[0]), bracket=(xs[j - 1], xs[j], xs[j + 1]),
                              method="golden", options={"xtol": 1e-15})
        if res.fun < av[j]:
            return float(res.fun), float(res.x)
    return float(av[j]), float(xs[j])


def bifurcation_diagnose(slope_plus: float, slope_minus: float, l_k: float, d_sweep=None,
                         k: int = 3, alpha: float = (math.sqrt(5) - 1) / 2,
                         grid: int = 2**14, tol: float = 1e-10):
    """Zero counts of the Case III composition as the planted separation d varies.

    The composition of a type I_+ piece (shifted by ``k alpha``) with a type
    I_- piece is scanned on a ``grid``-point window around ``[c1, c1 + d]``.
    A zero count of 1 means no crossing but ``min |g| <= tol`` (tangency).

    Returns ``(reports, d0, flags)``; ``d0`` is the transition point located
    by bisection between the last sweep value without zeros and the first
    one with two.  ``location_error`` is the distance from each zero to the
    nearer of the two planted critical points.
    """
    if l_k < 100:
        raise ValueError("bifurcation diagnostic needs l_k >= 100")
    if d_sweep is None:
        d_sweep = np.concatenate([[0.0], np.geomspace(1e-2, 5.0, 37) / l_k])
    d_sweep = np.sort(np.asarray(d_sweep, dtype=float))
    if d_sweep[0] < 0:
        raise ValueError("separations must be >= 0")
    c1 = 0.25
    half = 1.0 / l_k
    if max(slope_plus, slope_minus) * (d_sweep[-1] + 2 * half) >= HALF_PI:
        raise ValueError("window leaves the affine range of the planted pieces")

    def scan(d):
        g = planted_pair(slope_plus, slope_minus, d, k, alpha, c1=c1)
        H = _lift(g, k, l_k, alpha)
        xs = np.linspace(c1 - half, c1 + d + half, grid)
        cnt, zeros = _crossings(H, xs)
        m, _ = _min_gap(H, xs)
        if cnt == 0 and m <= tol:
            cnt = 1
        return min(cnt, 2), zeros, m

    counts, mins, errs = [], [], []
    for d in d_sweep:
        cnt, zeros, m = scan(d)
        counts.append(cnt)
        mins.append(m)
        errs.append(float(np.max(np.minimum(np.abs(zeros - c1), np.abs(zeros - c1 - d))))
                    if zeros.size else 0.0)

    flags = set()
    lo = [d for d, c in zip(d_sweep, counts) if c == 0]
    hi = [d for d, c in zip(d_sweep, counts) if c == 2]
    if not lo or not hi or max(lo) > min(hi):
        flags.add("unbracketed")
        d0 = math.nan
    else:
        a, b = max(lo), min(hi)
        for _ in range(60):
            mid = 0.5 * (a + b)
            a, b = (a, mid) if scan(mid)[0] > 0 else (mid, b)
            if b - a <= 1e-9 * b:
                break
        d0 = 0.5 * (a + b)
    if np.any(np.diff(counts) < 0):
        flags.add("non-monotone")
    reports = [BifurcationReport(float(d), float(l_k), int(c), float(d0), float(m), float(e))
               for d, c, m, e in zip(d_sweep, counts, mins, errs)]
    return reports, d0, flags


# ---------------------------------------------------------------------------
# driver


@dataclass
class LevelReport:
    level: int
    q: int
    case: str
    type: list[str]
    critical_points: list[float]
    r_plus_min: int
    r_minus_min: int
    growth_margin_min: float
    growth_pass_fraction: float
    nondeg_c: float
    drift: list[float]
    drift_bound: float
    angle_change: float
    angle_change_bound: float
    flags: list[str]

    def to_json(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def run_induction(params: CocycleParams, levels: int, grid_size: int = 2**10, samples: int = 128,
                  config: InductionConfig = DEFAULT_CONFIG) -> list[LevelReport]:
    """Run the induction from the initial angle function for up to ``levels`` steps."""
    if params.lam <= 1:
        raise ValueError("induction needs coupling > 1")
    afd = initial_angle(params, config=config)
    crit = critical_set(afd, params.freq)
    prev_fn = afd.fn
    r_prev = 1  # the initial angle function has no earlier return time
    log_lam = math.log(params.lam)
    reports = []
    for _ in range(levels):
        if crit.q > config.q_cap or crit.level + 2 >= len(params.freq.q):
            break
        xs = crit.samples(samples)
        rt = return_times(params.freq, crit, xs, config)
        growth = verify_growth(params, crit, rt, config)
        nxt = angle_function(params, crit, rt, grid_size, config)
        step = 2.0 * crit.radius / grid_size
        drift = [float(torus_distance(a, b)) for a, b in zip(nxt.critical_points, crit.points)]
        grid_all = np.concatenate(nxt.grid)
        change = float(np.max(rp1_abs(np.concatenate(nxt.g_values) - prev_fn(grid_all))))
        nd = nondegeneracy_check(nxt, nxt.critical_points,
                                 max(math.exp(-rt.r * log_lam), step), config.c_floor)
        reports.append(LevelReport(
            level=crit.level, q=crit.q, case=nxt.case, type=list(nxt.type_tags),
            critical_points=list(nxt.critical_points), r_plus_min=rt.r_plus_min,
            r_minus_min=rt.r_minus_min, growth_margin_min=float(growth.margin.min()),
            growth_pass_fraction=growth.pass_fraction, nondeg_c=nd.c_fit, drift=drift,
            drift_bound=math.exp(-config.drift_exponent * r_prev * log_lam) + step,
            angle_change=change,
            angle_change_bound=math.exp(-r_prev * log_lam) + config.angle_floor,
            flags=sorted(nxt.flags)))
        crit = critical_set(nxt, params.freq, crit.level + 1)
        prev_fn = nxt.fn
        r_prev = rt.r
    return reports
