import math

import numpy as np
import pytest

from qpcocycle import CocycleParams, amo, golden
from qpcocycle.spectral import (IDSEstimate, ids_dirichlet, lyapunov_avalanche, lyapunov_birkhoff,
                                phase_grid, thouless_check, thouless_integral)

FREQ = golden()
FREE = CocycleParams(amo(), 0.0, 0.0, FREQ)
GOLD_LOG = math.log((3 + math.sqrt(5)) / 2)


def free_ids(E, n):
    """Exact eigenvalue count of the free n-site Dirichlet Laplacian."""
    eig = 2 * np.cos(np.arange(1, n + 1) * np.pi / (n + 1))
    return np.mean(eig < E)


def test_phase_grid():
    xs = phase_grid(8, seed=3)
    assert xs.size == 8
    assert 0 <= xs[0] < 1 / 8
    np.testing.assert_allclose(np.diff(xs), 1 / 8)
    np.testing.assert_array_equal(xs, phase_grid(8, seed=3))
    with pytest.raises(ValueError):
        phase_grid(0)


def test_birkhoff_constant_cocycle():
    est = lyapunov_birkhoff(FREE.with_(E=3.0), 10**4, phases=1)
    assert est.value == pytest.approx(GOLD_LOG, abs=1e-3)
    assert est.method == "birkhoff"


def test_birkhoff_elliptic():
    est = lyapunov_birkhoff(FREE.with_(E=1.0), 10**4, phases=1)
    assert abs(est.value) <= 5e-2


@pytest.mark.slow
def test_birkhoff_amo_lambda_three():
    est = lyapunov_birkhoff(CocycleParams(amo(), 3.0, 0.0, FREQ), 10**5, phases=128)
    assert est.value == pytest.approx(math.log(3), abs=2e-2)
    assert est.stderr < 1e-3


def test_birkhoff_energy_array():
    es = np.array([-3.0, 3.0, 4.0])
    out = lyapunov_birkhoff(FREE, 10**4, phases=2, energies=es)
    assert [e.E for e in out] == list(es)
    assert out[0].value == pytest.approx(out[1].value, abs=1e-12)
    assert out[2].value == pytest.approx(math.log((4 + math.sqrt(12)) / 2), abs=1e-3)


def test_birkhoff_symmetry_in_energy():
    # v(x + 1/2) = -v(x), so L(E) = L(-E) as a phase average
    p = CocycleParams(amo(), 2.0, 0.7, FREQ)
    a = lyapunov_birkhoff(p, 5000, phases=64).value
    b = lyapunov_birkhoff(p.with_(E=-0.7), 5000, phases=64).value
    assert a == pytest.approx(b, abs=1e-2)


def test_avalanche_constant():
    p = FREE.with_(E=3.0)
    est = lyapunov_avalanche(p, 50, 4, 3, phases=4)
    ref = lyapunov_birkhoff(p, 800, phases=4).value
    assert not est.flags
    assert abs(est.value - GOLD_LOG) <= 1e-4
    assert abs(est.value - ref) <= 2e-3  # Birkhoff carries the O(1/n) bias the AP step removes


def test_avalanche_amo():
    est = lyapunov_avalanche(CocycleParams(amo(), 10.0, 0.0, FREQ), 100, 8, 3, phases=16)
    assert abs(est.value - math.log(10)) <= 1e-2
    assert len(est.residuals) == 2


def test_avalanche_elliptic_degenerate():
    est = lyapunov_avalanche(FREE.with_(E=1.0), 50, 4, 2, phases=4)
    assert "ap-degenerate" in est.flags


def test_avalanche_bad_args():
    with pytest.raises(ValueError):
        lyapunov_avalanche(FREE, 5, 4, 2, phases=2)
    with pytest.raises(ValueError):
        lyapunov_avalanche(FREE, 50, 1.5, 2, phases=2)


@pytest.mark.parametrize("E,expected,tol", [
    (0.0, 0.5, 2e-3), (-2.0001, 0.0, 1e-3), (math.sqrt(2), 0.75, 5e-3)])
def test_ids_free(E, expected, tol):
    est = ids_dirichlet(FREE, E, 1000, phases=4)
    assert abs(est.value - expected) <= tol
    assert est.value == pytest.approx(free_ids(E, 1000), abs=1e-12)


def test_ids_against_dense_eigenvalues():
    p = CocycleParams(amo(), 1.5, 0.0, FREQ)
    n = 200
    x = phase_grid(1, seed=0)[0]
    diag = p.lam * p.potential.v(x + np.arange(1, n + 1) * p.alpha)
    H = np.diag(diag) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)
    eig = np.linalg.eigvalsh(H)
    for E in (-3.0, -0.4, 0.0, 1.1, 3.5):
        assert ids_dirichlet(p, E, n, phases=1).value == pytest.approx(np.mean(eig < E), abs=1e-12)


def test_ids_monotone_and_vectorised():
    es = np.linspace(-7, 7, 41)  # spectrum lies in [-2 - 2 lam, 2 + 2 lam]
    grid = ids_dirichlet(CocycleParams(amo(), 2.0, 0.0, FREQ), es, 300, phases=3)
    vals = [g.value for g in grid]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert vals[0] == 0.0 and vals[-1] == 1.0


def test_thouless_free():
    es = np.linspace(-3, 3, 400)
    grid = ids_dirichlet(FREE, es, 1000, phases=1)
    assert abs(thouless_check(0.0, grid)) <= 2e-2
    assert thouless_check(3.0, grid) == pytest.approx(GOLD_LOG, abs=2e-2)


def test_thouless_point_mass():
    # the atom at 0 sits at the midpoint of the cell carrying the jump
    es = np.linspace(-1.005, 0.995, 201)
    ns = (es > 0).astype(float)
    assert thouless_integral(2.5, es, ns) == pytest.approx(math.log(2.5), abs=1e-12)
    assert thouless_integral(-0.7, es, ns) == pytest.approx(math.log(0.7), abs=1e-12)


def test_thouless_errors():
    with pytest.raises(ValueError):
        thouless_integral(0.0, [0, 1, 2], [0.0, 0.5, 0.4])
    with pytest.raises(ValueError):
        thouless_check(0.0, [IDSEstimate(0.0, 10, 1, 0.5)] * 5)
