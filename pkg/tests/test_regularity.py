import math

import numpy as np
import pytest

from qpcocycle import CocycleParams, amo, golden
from qpcocycle.regularity import default_scales, holder_fit, joint_report, modulus

FREE = CocycleParams(amo(), 0.0, 0.0, golden())
ES = np.linspace(-1, 1, 401)


def test_square_root_exponent():
    fit = holder_fit(ES, np.sqrt(np.abs(ES)))
    assert fit.sigma_hat == pytest.approx(0.5, abs=0.05)
    assert not fit.flags


def test_lipschitz_exponent():
    fit = holder_fit(ES, 3 * ES + 1)
    assert fit.sigma_hat == pytest.approx(1.0, abs=0.02)
    assert math.exp(fit.log_C) == pytest.approx(3.0, rel=1e-9)


def test_modulus_and_scales():
    assert modulus(np.array([0.0, 1.0, 4.0, 9.0]), 1) == 5.0
    np.testing.assert_allclose(default_scales(0.5, 3), [2.0, 4.0, 8.0])


def test_input_errors():
    bad = np.sqrt(np.abs(ES))
    bad[3] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        holder_fit(ES, bad)
    warped = ES**3
    with pytest.raises(ValueError, match="uniform"):
        holder_fit(warped, warped)
    with pytest.raises(ValueError):
        holder_fit(ES, ES, scales=[0.001] * 5)
    with pytest.raises(ValueError):
        holder_fit(ES, ES, scales=default_scales(ES[1] - ES[0], 3))


def test_constant_values_are_degenerate():
    fit = holder_fit(ES, np.ones_like(ES))
    assert fit.degenerate and math.isnan(fit.sigma_hat)
    assert sum(f.startswith("dropped:") for f in fit.flags) == 6


def test_free_inside_spectrum_degenerate():
    rep = joint_report(FREE, (-1.0, 1.0), grid=200, n=4000, phases=2)
    assert rep.lyapunov.degenerate
    assert rep.cross_check is None


def test_free_off_spectrum_is_smooth():
    rep = joint_report(FREE, (2.5, 3.5), grid=400, n=20000, phases=2, require_spectrum=False)
    assert rep.lyapunov.sigma_hat == pytest.approx(1.0, abs=0.05)
    exact = np.log((rep.energies + np.sqrt(rep.energies**2 - 4)) / 2)
    np.testing.assert_allclose(rep.L, exact, atol=1e-3)


def test_vacuous_window():
    with pytest.raises(ValueError, match="vacuous"):
        joint_report(FREE, (2.5, 3.5), grid=50, n=1000, phases=2)
