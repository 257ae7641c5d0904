"""Continued-fraction arithmetic for rotation numbers.

A :class:`Frequency` stores a high-precision value of alpha in (0, 1)
together with its partial quotients ``a_1, a_2, ...`` and convergents
``(p_k, q_k)`` starting at ``(p_0, q_0) = (0, 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

Q_LIMIT = 2**127
DEFAULT_PREC = 256


@dataclass(frozen=True)
class Frequency:
    alpha: mpmath.mpf
    partial_quotients: tuple[int, ...]
    convergents: tuple[tuple[int, int], ...]
    flags: frozenset[str] = field(default_factory=frozenset)
    label: str = ""

    @property
    def value(self) -> float:
        return float(self.alpha)

    @property
    def q(self) -> tuple[int, ...]:
        return tuple(q for _, q in self.convergents)

    def first_index_at_least(self, q_min: int) -> int:
        for k, (_, q) in enumerate(self.convergents):
            if q >= q_min:
                return k
        raise ValueError(f"no stored convergent with q >= {q_min}")


@dataclass(frozen=True)
class FrequencyClass:
    beta_hat: float
    diophantine_witness: tuple[float, float] | None
    tail_start: int


def _exact(alpha) -> tuple[Fraction, Fraction, mpmath.mpf]:
    """Exact rational representative of the input and its uncertainty."""
    if isinstance(alpha, Fraction):
        return alpha, Fraction(0), mpmath.mpf(alpha.numerator) / alpha.denominator
    if isinstance(alpha, str):
        x = Fraction(alpha)
        return x, Fraction(0), mpmath.mpf(x.numerator) / x.denominator
    if isinstance(alpha, mpmath.mpf):
        man, exp = alpha.man_exp
        x = Fraction(int(man)) * (Fraction(2) ** int(exp))
        # relative uncertainty of the working precision in effect
        return x, abs(x) * Fraction(2) ** (1 - mpmath.mp.prec), alpha
    if isinstance(alpha, (float, int, np.floating, np.integer)):
        a = float(alpha)
        if not math.isfinite(a):
            raise ValueError("alpha must be finite")
        return Fraction(a), Fraction(math.ulp(a)), mpmath.mpf(a)
    raise TypeError(f"unsupported alpha type {type(alpha).__name__}")


def expand(alpha, max_q: int, label: str = "") -> Frequency:
    """Continued-fraction expansion up to the largest q_k <= max_q.

    Expansion stops early, with flag ``rational-truncation``, when alpha is
    rational or when the convergent already agrees with alpha to within the
    input precision.
    """
    if max_q < 1:
        raise ValueError("max_q must be >= 1")
    x, delta, mp_alpha = _exact(alpha)
    if not (0 < x < 1):
        raise ValueError("alpha must lie in (0, 1)")

    flags: set[str] = set()
    quotients: list[int] = []
    convergents = [(0, 1)]
    p_prev, q_prev = 1, 0
    p, q = 0, 1
    rest = x
    while True:
        if rest == 0 or (q > 1 and abs(x - Fraction(p, q)) <= delta):
            flags.add("rational-truncation")
            break
        inv = 1 / rest
        a = inv.numerator // inv.denominator
        p_next, q_next = a * p + p_prev, a * q + q_prev
        if q_next > Q_LIMIT:
            flags.add("q-overflow")
            break
        if q_next > max_q:
            break
        quotients.append(int(a))
        p_prev, q_prev, p, q = p, q, p_next, q_next
        convergents.append((p, q))
        rest = inv - a
    return Frequency(mp_alpha, tuple(quotients), tuple(convergents), frozenset(flags), label)


def golden(max_q: int = 10**6, prec: int = DEFAULT_PREC) -> Frequency:
    with mpmath.workprec(prec):
        alpha = (mpmath.sqrt(5) - 1) / 2
        return expand(alpha, max_q, label="golden")


def sqrt2m1(max_q: int = 10**6, prec: int = DEFAULT_PREC) -> Frequency:
    with mpmath.workprec(prec):
        alpha = mpmath.sqrt(2) - 1
        return expand(alpha, max_q, label="sqrt2m1")


def _evaluate(quotients, tail: mpmath.mpf) -> mpmath.mpf:
    value = tail
    for a in reversed(quotients):
        value = 1 / (a + value)
    return value


def synth(beta_target: float, depth: int, seed: int = 0, prefix: int = 3) -> Frequency:
    """Frequency whose denominators grow like ``q_{k+1} ~ exp(beta * q_k)``.

    The first ``prefix`` partial quotients are drawn from {1, 2}; each later
    one is chosen so that the next denominator is the closest available
    value to ``exp(beta_target * q_k)``.  A golden-mean tail is appended so
    the value is irrational.  Growth stops, flagged ``q-overflow``, once the
    next denominator would exceed 2**127.
    """
    if beta_target < 0:
        raise ValueError("beta_target must be >= 0")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    rng = np.random.default_rng(seed)
    quotients: list[int] = []
    q_prev, q = 0, 1
    flags: set[str] = set()
    for k in range(depth):
        if k < prefix:
            a = int(rng.integers(1, 3))
        else:
            target = beta_target * q
            if target > 127 * math.log(2):
                flags.add("q-overflow")
                break
            a = max(1, round((math.exp(target) - q_prev) / q))
        if a * q + q_prev > Q_LIMIT:
            flags.add("q-overflow")
            break
        quotients.append(a)
        q_prev, q = q, a * q + q_prev

    prec = 64 + 4 * max(q.bit_length(), 8)
    with mpmath.workprec(prec):
        tail = (mpmath.sqrt(5) - 1) / 2
        alpha = _evaluate(quotients, tail)
        freq = expand(alpha, q, label=f"synth:beta={beta_target},seed={seed}")
    if freq.partial_quotients != tuple(quotients):
        raise ArithmeticError("re-expansion did not reproduce the construction")
    return Frequency(freq.alpha, freq.partial_quotients, freq.convergents,
                     frozenset(set(freq.flags) | flags), freq.label)


def from_spec(text: str, max_q: int = 10**6) -> Frequency:
    """Parse ``golden``, ``sqrt2m1``, ``synth:beta=<b>,seed=<s>`` or a decimal."""
    text = text.strip()
    if text == "golden":
        return golden(max_q)
    if text == "sqrt2m1":
        return sqrt2m1(max_q)
    if text.startswith("synth:"):
        opts = dict(kv.split("=", 1) for kv in text[6:].split(",") if kv)
        unknown = set(opts) - {"beta", "seed", "depth"}
        if unknown or "beta" not in opts:
            raise ValueError(f"bad synth spec {text!r}")
        return synth(float(opts["beta"]), int(opts.get("depth", 8)), int(opts.get("seed", 0)))
    try:
        return expand(text, max_q, label=text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad alpha spec {text!r}: {exc}") from None


def beta_estimate(freq: Frequency, tail_start: int = 3, tau: float = 2.0,
                  c_max: float = 10.0) -> FrequencyClass:
    """Finite-data stand-in for ``limsup log(q_{k+1}) / q_k``.

    The sup is taken over the later half of the stored tail (indices from
    ``tail_start`` on), so early transients fade as more convergents are
    stored.  A Diophantine witness ``(c, tau)`` is reported when
    ``q_{k+1} <= c * q_k**tau`` holds on the stored data with ``c <= c_max``.
    """
    qs = freq.q
    if len(qs) < tail_start + 2:
        raise ValueError(f"insufficient tail: need {tail_start + 2} convergents, have {len(qs)}")
    start = max(tail_start, (tail_start + len(qs) - 2) // 2)
    beta_hat = max(math.log(qs[k + 1]) / qs[k] for k in range(start, len(qs) - 1))
    c = max(qs[k + 1] / qs[k] ** tau for k in range(1, len(qs) - 1))
    witness = (c, tau) if c <= c_max else None
    return FrequencyClass(beta_hat, witness, tail_start)


def torus_distance(x, y):
    d = np.mod(np.asarray(x, dtype=float) - np.asarray(y, dtype=float), 1.0)
    return np.minimum(d, 1.0 - d)


def min_return_time(alpha: float, x: float, center: float, radius: float,
                    k_max: int, k_min: int = 1, chunk: int = 1 << 16) -> int | None:
    """Smallest k in [k_min, k_max] with ||x + k alpha - center|| < radius."""
    alpha = float(alpha)
    k0 = k_min
    while k0 <= k_max:
        ks = np.arange(k0, min(k0 + chunk, k_max + 1))
        hits = np.nonzero(torus_distance(x + ks * alpha, center) < radius)[0]
        if hits.size:
            return int(ks[hits[0]])
        k0 += chunk
    return None


def convergent_bounds(freq: Frequency, k: int) -> tuple[mpmath.mpf, mpmath.mpf, mpmath.mpf]:
    """``(1/(q_k (q_{k+1} + q_k)), |alpha - p_k/q_k|, 1/(q_k q_{k+1}))`` at 512 bits."""
    p, q = freq.convergents[k]
    q1 = freq.q[k + 1]
    with mpmath.workprec(512):
        err = abs(freq.alpha - mpmath.mpf(p) / q)
        return mpmath.mpf(1) / (q * (q1 + q)), err, mpmath.mpf(1) / (q * q1)
