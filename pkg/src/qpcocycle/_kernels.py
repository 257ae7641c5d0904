"""Compiled inner loops.

All kernels work lane-by-lane on a chunk of precomputed step data of shape
``(steps, lanes)`` and update running state in place.  Lane ``j`` only
consumes rows ``r`` with ``m0 + r < lengths[j]``.
"""

import math

import numba
import numpy as np

RESCALE_SQ = math.exp(60.0)  # Frobenius norm above e^30


@numba.njit(cache=True, nogil=True)
def schrodinger_advance(a, b, c, d, acc, e, lengths, m0):
    steps, lanes = e.shape
    for j in range(lanes):
        stop = min(steps, lengths[j] - m0)
        if stop <= 0:
            continue
        aj, bj, cj, dj, lj = a[j], b[j], c[j], d[j], acc[j]
        for r in range(stop):
            ej = e[r, j]
            na = ej * aj - cj
            nb = ej * bj - dj
            cj = aj
            dj = bj
            aj = na
            bj = nb
            if (r & 3) == 3:
                f2 = aj * aj + bj * bj + cj * cj + dj * dj
                if f2 > RESCALE_SQ:
                    f = math.sqrt(f2)
                    aj /= f
                    bj /= f
                    cj /= f
                    dj /= f
                    lj += math.log(f)
        a[j], b[j], c[j], d[j], acc[j] = aj, bj, cj, dj, lj


@numba.njit(cache=True, nogil=True)
def matrix_advance(a, b, c, d, acc, m11, m12, m21, m22, lengths, m0):
    steps, lanes = m11.shape
    for j in range(lanes):
        stop = min(steps, lengths[j] - m0)
        if stop <= 0:
            continue
        aj, bj, cj, dj, lj = a[j], b[j], c[j], d[j], acc[j]
        for r in range(stop):
            p, q, s, t = m11[r, j], m12[r, j], m21[r, j], m22[r, j]
            na = p * aj + q * cj
            nb = p * bj + q * dj
            nc = s * aj + t * cj
            nd = s * bj + t * dj
            aj, bj, cj, dj = na, nb, nc, nd
            if (r & 3) == 3:
                f2 = aj * aj + bj * bj + cj * cj + dj * dj
                if f2 > RESCALE_SQ:
                    f = math.sqrt(f2)
                    aj /= f
                    bj /= f
                    cj /= f
                    dj /= f
                    lj += math.log(f)
        a[j], b[j], c[j], d[j], acc[j] = aj, bj, cj, dj, lj


@numba.njit(cache=True, nogil=True)
def sturm_advance(diag, energy, pivot, count):
    """Pivots of the LDL^T factorization of H - E; counts negative pivots."""
    eps = np.finfo(np.float64).eps
    steps, lanes = diag.shape
    for j in range(lanes):
        dp = pivot[j]
        cnt = count[j]
        ej = energy[j]
        for r in range(steps):
            dk = diag[r, j] - ej
            if dp != np.inf:
                dk -= 1.0 / dp
            if dk == 0.0:
                dk = -eps
            if dk < 0.0:
                cnt += 1
            dp = dk
        pivot[j] = dp
        count[j] = cnt
