import math

import numpy as np
import pytest

from sagnac_wigner.errors import InvalidParam, PhaseNull, ZeroPower
from sagnac_wigner.field import Ensemble, Field1D, make_gaussian, total_power, wedge_beam
from sagnac_wigner.photons import (
    CountRecord,
    click_probability,
    estimate_wigner,
    photon_scan,
    sample_counts,
    wigner_from_probabilities,
)
from sagnac_wigner.sagnac import MirrorSetting, grid_settings
from sagnac_wigner.wigner import wigner_point

# near a zero crossing of the wedge fringe cos(6 x): p_bright close to 1/2
FRINGE_MID = MirrorSetting(0.25, 0.0)


def test_click_probabilities(wide_grid):
    ens = wedge_beam(wide_grid)
    s_total = total_power(ens)
    for s in (FRINGE_MID, MirrorSetting(0.0, 0.0), MirrorSetting(-1.0, 2.0)):
        pb, pd = click_probability(ens, s)
        assert pb + pd == pytest.approx(1.0, abs=1e-15)
        assert 0 <= pb <= 1 and 0 <= pd <= 1
        assert pb - pd == pytest.approx(math.pi * wigner_point(ens, s.x, s.k) / s_total, abs=1e-12)


def test_zero_power(grid):
    with pytest.raises(ZeroPower):
        click_probability(Field1D(grid, np.zeros(grid.n)), MirrorSetting(0, 0))


def test_count_record_validation():
    with pytest.raises(InvalidParam):
        CountRecord(MirrorSetting(0, 0), 6, 5, 10)


@pytest.mark.parametrize("n_total", [0, -5, 2.5])
def test_n_total_validation(grid, n_total):
    with pytest.raises(InvalidParam):
        sample_counts(make_gaussian(grid), MirrorSetting(0, 0), n_total)


def test_counts_reproducible(wide_grid):
    ens = wedge_beam(wide_grid)
    a = sample_counts(ens, FRINGE_MID, 1000, seed=5, index=3)
    b = sample_counts(ens, FRINGE_MID, 1000, seed=5, index=3)
    assert a == b
    assert a.n_bright + a.n_dark == 1000
    # different points draw from different substreams
    draws = {sample_counts(ens, FRINGE_MID, 1000, seed=5, index=i).n_bright for i in range(10)}
    assert len(draws) > 1


def test_photon_scan_and_estimate(wide_grid):
    ens = wedge_beam(wide_grid)
    xs = np.arange(-1.0, 1.001, 0.25)
    ks = np.arange(-1.0, 1.001, 0.5)
    records = photon_scan(ens, grid_settings(xs, ks), 2000, seed=9)
    again = photon_scan(ens, grid_settings(xs, ks), 2000, seed=9)
    assert records == again
    wmap = estimate_wigner(records, total_power(ens))
    assert wmap.values.shape == (xs.size, ks.size)
    assert wmap.meta["seed"] == 9
    se = wmap.meta["stderr"]
    assert se.shape == wmap.values.shape and np.all(se >= 0)
    # deviations should be of the order of the reported error bars
    exact = np.array([[wigner_point(ens, x, k) for k in ks] for x in xs])
    z = (wmap.values - exact) / np.where(se > 0, se, np.inf)
    assert np.max(np.abs(z)) < 5


def test_estimator_phase_null():
    with pytest.raises(PhaseNull):
        wigner_from_probabilities(0.6, 0.4, 1.0, math.pi / 2)


def test_estimator_unbiased_and_shot_noise_scaling(wide_grid):
    ens = wedge_beam(wide_grid)
    truth = wigner_point(ens, FRINGE_MID.x, FRINGE_MID.k)
    reps = 2000
    variances = []
    for n in (100, 1000, 10000):
        est = np.array(
            [
                wigner_from_probabilities(r.n_bright / n, r.n_dark / n, 1.0, 0.0)
                for r in (sample_counts(ens, FRINGE_MID, n, seed=s) for s in range(reps))
            ]
        )
        se = est.std(ddof=1) / math.sqrt(reps)
        assert abs(est.mean() - truth) < 3 * se
        variances.append(est.var(ddof=1))
        pb, _ = click_probability(ens, FRINGE_MID)
        # binomial prediction for the estimator variance
        assert variances[-1] == pytest.approx(4 * pb * (1 - pb) / (n * math.pi**2), rel=0.1)
    slope = np.polyfit(np.log([100, 1000, 10000]), np.log(variances), 1)[0]
    assert abs(slope + 1) < 0.1


def test_mixture_click_probability(wide_grid):
    g1 = make_gaussian(wide_grid, x_c=-1.0)
    g2 = make_gaussian(wide_grid, x_c=1.0)
    ens = Ensemble(((0.5, g1), (0.5, g2)))
    s = MirrorSetting(1.0, 0.0)
    p_mix = click_probability(ens, s)[0]
    p1 = click_probability(g1, s)[0]
    p2 = click_probability(g2, s)[0]
    assert p_mix == pytest.approx(0.5 * (p1 + p2), abs=1e-14)
