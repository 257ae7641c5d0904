import math

import numpy as np
import pytest

from qpcocycle import CocycleParams, amo, golden, tabulated
from qpcocycle.ldt import (decay_fit, deviant_phases, deviation_fraction, fit_decay,
                           grid_fractions, lambda_table, preimage_distance, resonant_measure)

FREQ = golden()
P10 = CocycleParams(amo(), 10.0, 0.0, FREQ)


@pytest.mark.parametrize("lam", [0.0, 1.0])
def test_coupling_must_exceed_one(lam):
    with pytest.raises(ValueError):
        deviation_fraction(CocycleParams(amo(), lam, 0.0, FREQ), 10)


def test_small_scale_deviates():
    assert deviation_fraction(P10, 10, phases=10**4) > 0


def test_large_scale_fraction_small_and_decreasing():
    f200 = deviation_fraction(P10, 200, phases=10**4)
    f2000 = deviation_fraction(P10, 2000, phases=10**4)
    assert f2000 <= 1e-2
    assert f2000 <= f200


def test_grid_fractions_match_single_scale():
    fr = grid_fractions(P10, [20, 10], phases=2000)
    assert fr == [deviation_fraction(P10, 10, phases=2000), deviation_fraction(P10, 20, phases=2000)]


def test_constant_cocycle_never_deviates():
    # v = 0 and E = 3 lam: every step is the same hyperbolic matrix
    p = CocycleParams(tabulated(np.zeros(16)), 2.0, 6.0, FREQ)
    assert deviation_fraction(p, 50, phases=1000) == 0.0


def test_resonant_tracks_grid():
    i = 20
    grid = deviation_fraction(P10, i, phases=10**5)
    lm, _ = resonant_measure(P10, i)
    assert math.exp(lm) == pytest.approx(grid, rel=0.25)


def test_resonant_without_zeros():
    lm, flags = resonant_measure(P10.with_(E=30.0), 50)
    assert lm == -math.inf and "no-resonant-steps" in flags


def test_fit_decay_synthetic():
    lam = 10.0
    scales = np.array([50, 100, 200, 400])
    logs = -0.05 * scales * math.log(lam) + 1.0
    delta, resid, used = fit_decay(scales, logs, lam)
    assert delta == pytest.approx(0.05) and resid < 1e-10 and used == 4
    logs[:3] = -math.inf
    assert math.isnan(fit_decay(scales, logs, lam)[0])


def test_decay_fit_arguments():
    with pytest.raises(ValueError):
        decay_fit(P10, [10, 20, 40])
    with pytest.raises(ValueError):
        decay_fit(P10, [10, 20, 30, 40])
    with pytest.raises(ValueError):
        decay_fit(P10, [10, 20, 40, 80], method="magic")


def test_decay_fit_grid_positive():
    rep = decay_fit(P10, [10, 20, 40, 80], phases=10**4, method="grid")
    assert rep.delta_hat > 0
    assert rep.monotone
    assert len(rep.running_delta()) == 4


def test_decay_fit_all_zero_reports_bound():
    p = CocycleParams(tabulated(np.zeros(16)), 2.0, 6.0, FREQ)
    rep = decay_fit(p, [10, 20, 40, 80], phases=1000, method="grid")
    assert math.isnan(rep.delta_hat)
    assert any(f.startswith("delta>=") for f in rep.flags)
    assert "off-spectrum" in rep.flags


def test_lambda_table_order():
    reps = lambda_table(P10, [5.0, 20.0], [10, 20, 40, 80], phases=2000, method="grid")
    assert [r.lam for r in reps] == [5.0, 20.0]


def test_deviant_phases_near_preimages():
    i = 40
    bad = deviant_phases(P10, i, phases=10**5)
    assert bad.size > 0
    assert np.all(preimage_distance(P10, bad, i) <= 10.0 / i)
