"""Norm and angle estimates for products of hyperbolic SL(2,R) matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cocycle import HALF_PI, log_norm_scaled, polar, polar_angles, rotation, rp1_reduce

ETA = 1e-2
KAPPA = 1e-3
LOWER_BOUND_CONST = 0.5
TAN_CLAMP = 1e-12


@dataclass(frozen=True)
class PairGeometry:
    e1: float
    e2: float
    theta: float
    regime: str  # nonresonant | resonant_e2_dominant | resonant_e1_dominant | unclassified


@dataclass(frozen=True)
class APReport:
    m: int
    mu: float
    cond8_ok: bool
    cond9_ok: bool
    defect: float
    bound: float

    @property
    def ratio(self) -> float:
        return self.defect / self.bound


def classify(e1: float, e2: float, theta: float, eta: float = ETA, kappa: float = KAPPA) -> str:
    if abs(theta) >= max(e1**-eta, e2**-eta):
        return "nonresonant"
    if e1 <= e2**kappa:
        return "resonant_e2_dominant"
    if e2 <= e1**kappa:
        return "resonant_e1_dominant"
    return "unclassified"


def pair_geometry(E2, E1, eta: float = ETA, kappa: float = KAPPA) -> PairGeometry:
    p1, p2 = polar(E1), polar(E2)
    theta = float(rp1_reduce(p2.s - p1.u))
    e1, e2 = math.exp(p1.log_norm), math.exp(p2.log_norm)
    return PairGeometry(e1, e2, theta, classify(e1, e2, theta, eta, kappa))


def nonresonant_lower_bound(g: PairGeometry) -> float:
    """``C e1 e2 |sin theta|`` with C = 1/2.

    theta = pi/2 is the aligned configuration, where the product norm is
    exactly ``e1 e2``.
    """
    if g.regime != "nonresonant":
        raise ValueError(f"lower bound needs a nonresonant pair, got {g.regime}")
    return LOWER_BOUND_CONST * g.e1 * g.e2 * abs(math.sin(g.theta))


def resonant_direction_prediction(E2, E1) -> float:
    """Predicted stable direction of ``E2 @ E1`` when E2 dominates."""
    p1, p2 = polar(E1), polar(E2)
    if p1.log_norm < math.log(10.0) or p2.log_norm < 10.0 * p1.log_norm:
        raise ValueError("dominance precondition fails: need ||E1|| >= 10 and ||E2|| >= ||E1||^10")
    theta = float(rp1_reduce(p2.s - p1.u))
    theta = float(np.clip(theta, -HALF_PI + TAN_CLAMP, HALF_PI - TAN_CLAMP))
    pred = p1.s + math.atan(math.exp(2.0 * p1.log_norm) * math.tan(theta)) - HALF_PI
    return pred % math.pi


def chain_log_norm(mats) -> float:
    """log ||B_m ... B_1|| for unimodular factors, applied in order."""
    M = np.eye(2)
    acc = 0.0
    for B in mats:
        M = np.asarray(B, dtype=float) @ M
        f = math.sqrt(float(np.sum(M * M)))
        M /= f
        acc += math.log(f)
    return float(log_norm_scaled(M[0, 0], M[0, 1], M[1, 0], M[1, 1], acc))


def avalanche_check(B, mu: float) -> APReport:
    m = len(B)
    if m < 3:
        raise ValueError("avalanche check needs at least 3 matrices")
    norms = np.array([chain_log_norm([b]) for b in B])
    pairs = np.array([chain_log_norm([B[j], B[j + 1]]) for j in range(m - 1)])
    cond8 = bool(norms.min() >= math.log(mu) - 1e-12 and mu > m)  # slack for roundoff at equality
    cond9 = bool(np.max(np.abs(norms[:-1] + norms[1:] - pairs)) < 0.5 * math.log(mu))
    defect = abs(chain_log_norm(B) + norms[1:-1].sum() - pairs.sum())
    return APReport(m, float(mu), cond8, cond9, float(defect), m / mu)


def hyperbolic(log_norm: float, u: float, s: float) -> np.ndarray:
    """SL(2) matrix with prescribed norm and unstable/stable directions."""
    sig = math.exp(log_norm)
    return rotation(u) @ np.diag([sig, 1.0 / sig]) @ rotation(HALF_PI - s)


def random_chain(rng: np.random.Generator, m: int, mu: float, ensemble: str = "random",
                 max_tries: int = 1000) -> list[np.ndarray]:
    """Chain of ``m`` matrices with norms in [mu, 10 mu] satisfying both AP conditions.

    ``aligned``: consecutive frames coaxial; ``rotated``: small fixed twist;
    ``random``: independent directions, resampled until condition (9) holds.
    """
    logs = math.log(mu) + rng.uniform(0.0, math.log(10.0), size=m)
    if ensemble == "aligned":
        return [np.diag([math.exp(l), math.exp(-l)]) for l in logs]
    if ensemble == "rotated":
        return [rotation(0.01 * (j + 1)) @ np.diag([math.exp(l), math.exp(-l)])
                for j, l in enumerate(logs)]
    if ensemble != "random":
        raise ValueError(f"unknown ensemble {ensemble!r}")
    for _ in range(max_tries):
        us = rng.uniform(0.0, math.pi, size=m)
        ss = rng.uniform(0.0, math.pi, size=m)
        chain = [hyperbolic(l, u, s) for l, u, s in zip(logs, us, ss)]
        rep = avalanche_check(chain, mu)
        if rep.cond8_ok and rep.cond9_ok:
            return chain
    raise RuntimeError("could not sample a chain satisfying the AP conditions")


def product_angles(M) -> tuple[float, float]:
    M = np.asarray(M, dtype=float)
    u, s = polar_angles(M[0, 0], M[0, 1], M[1, 0], M[1, 1])
    return float(u), float(s)
