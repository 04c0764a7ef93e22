from dataclasses import replace

import numpy as np
import pytest

from sagnac_wigner.analysis import (
    PARAM_NAMES,
    FitResult,
    TwoBeamModel,
    fit_two_beam,
    fringe_frequency,
    fringe_resolution,
    initial_model,
    model_map,
    model_wigner,
    parse_fit_report,
)
from sagnac_wigner.errors import BadInit, InvalidParam, NoConvergence, NoPeak
from sagnac_wigner.field import Grid1D, make_gaussian, make_partially_coherent_pair, wedge_beam
from sagnac_wigner.wigner import WignerMap, wigner_map

X_FIT = np.arange(-4.0, 4.001, 0.2)
K_FIT = np.arange(-6.0, 6.001, 0.3)


@pytest.fixture(scope="module")
def grid512():
    return Grid1D(512, 0.05)


def pair_map(grid, mu, x1=0.0, x2=0.0, k1=3.0, k2=-3.0, c=0.1):
    u1 = make_gaussian(grid, x_c=x1, k_c=k1, c=c)
    u2 = make_gaussian(grid, x_c=x2, k_c=k2, c=c)
    return wigner_map(make_partially_coherent_pair(u1, u2, mu), X_FIT, K_FIT)


def test_model_validation():
    with pytest.raises(InvalidParam):
        model_wigner(TwoBeamModel(a=0.0), 0.0, 0.0)
    with pytest.raises(InvalidParam):
        model_wigner(TwoBeamModel(amp1=-0.1), 0.0, 0.0)
    with pytest.raises(InvalidParam):
        model_wigner(TwoBeamModel(mu=1.5), 0.0, 0.0)


def test_incoherent_midpoint_empty():
    m = TwoBeamModel(mu=0.0, k1=4.0, k2=-4.0)
    assert abs(model_wigner(m, 0.0, 0.0)) < 1e-6
    lobes = model_wigner(replace(m, amp2=0.0), 0.3, 3.5) + model_wigner(replace(m, amp1=0.0), 0.3, 3.5)
    assert model_wigner(m, 0.3, 3.5) == pytest.approx(lobes, abs=1e-15)


def test_model_matches_wedge_oracle(grid512):
    oracle = wigner_map(wedge_beam(grid512, c=0.1), X_FIT, K_FIT)
    model = model_map(TwoBeamModel(0.5, 0.5, 0, 0, 3, -3, 1, 0.1, 1, 0, 0), X_FIT, K_FIT)
    assert np.max(np.abs(oracle.values - model)) < 1e-8


def test_model_matches_displaced_pair(grid512):
    # lobes separated in x as well as k: exercises the (x1 - x2)(k - k_mid) term
    oracle = pair_map(grid512, 1.0, x1=-1.0, x2=1.5, k1=2.0, k2=-2.5, c=-0.2)
    # constant cross phase of the two constructor beams: psi = -(x1 - x2) k_mid
    psi = -(-1.0 - 1.5) * (2.0 - 2.5) / 2
    model = model_map(TwoBeamModel(0.5, 0.5, -1.0, 1.5, 2.0, -2.5, 1.0, -0.2, 1.0, psi, 0.0), X_FIT, K_FIT)
    assert np.max(np.abs(oracle.values - model)) < 1e-8


def test_cross_term_linear_in_mu():
    base = TwoBeamModel(mu=1.0)
    # lobe tails reach the midpoint, so compare the cross term alone
    w0 = model_wigner(replace(base, mu=0.0), 0.0, 0.0)
    w1 = model_wigner(base, 0.0, 0.0) - w0
    for mu in (0.3, 0.5, -0.6):
        assert model_wigner(replace(base, mu=mu), 0.0, 0.0) - w0 == pytest.approx(mu * w1, abs=1e-9)


def test_cross_term_frequency():
    x = np.arange(-6, 6.001, 0.05)
    k = np.arange(-2, 2.001, 0.5)
    m = TwoBeamModel(k1=2.5, k2=-2.0)
    wmap = WignerMap(x, k, model_map(m, x, k))
    assert fringe_frequency(wmap, 0.25) == pytest.approx(4.5, abs=fringe_resolution(wmap))


def test_noiseless_fit_recovers_parameters():
    truth = TwoBeamModel(0.6, 0.4, -0.3, 0.2, 2.8, -3.1, 1.1, 0.08, 0.7, 0.4, 0.0)
    wmap = WignerMap(X_FIT, K_FIT, model_map(truth, X_FIT, K_FIT))
    res = fit_two_beam(wmap)
    for name in PARAM_NAMES:
        assert getattr(res.best, name) == pytest.approx(getattr(truth, name), rel=1e-6, abs=1e-9)
    assert res.stderr["mu"] < 1e-6
    assert res.rms_residual < 1e-10


@pytest.mark.parametrize("mu0", [0.0, 0.25, 0.5, 0.75, 1.0])
def test_fit_recovers_degree_of_coherence(grid512, mu0):
    res = fit_two_beam(pair_map(grid512, mu0))
    assert res.best.mu == pytest.approx(mu0, abs=1e-6)


def test_fit_deterministic(grid512):
    wmap = pair_map(grid512, 0.5)
    a, b = fit_two_beam(wmap), fit_two_beam(wmap)
    assert a.report() == b.report()


def test_initial_model_locates_lobes(grid512):
    init = initial_model(pair_map(grid512, 1.0))
    assert init.k1 == pytest.approx(3.0, abs=0.3)
    assert init.k2 == pytest.approx(-3.0, abs=0.3)


def test_gaussian_map_bad_init(grid512):
    wmap = wigner_map(make_gaussian(grid512), X_FIT, K_FIT)
    with pytest.raises(BadInit):
        fit_two_beam(wmap)


def test_bad_init_cost(grid512):
    wmap = pair_map(grid512, 1.0)
    far = TwoBeamModel(50.0, 50.0, 0, 0, 3, -3, 1, 0.1, 1, 0, 0)
    with pytest.raises(BadInit, match="10x"):
        fit_two_beam(wmap, far)


def test_no_convergence_returns_best(grid512):
    wmap = pair_map(grid512, 0.5)
    init = replace(initial_model(wmap), mu=0.0, a=1.4)
    with pytest.raises(NoConvergence) as info:
        fit_two_beam(wmap, init, max_iter=1)
    assert isinstance(info.value.best, TwoBeamModel)


def test_report_roundtrip():
    model = TwoBeamModel(mu=1.02)
    res = FitResult(model, {n: 0.01 for n in PARAM_NAMES}, 0.003, 7, 1.0)
    parsed = parse_fit_report(res.report())
    assert parsed["mu"] == pytest.approx(1.02)
    assert parsed["mu_stderr"] == pytest.approx(0.01)
    assert parsed["iterations"] == 7
    assert parsed["mu_flag"] == "unphysical, within error"
    assert "mu_flag" not in parse_fit_report(replace(res, best=TwoBeamModel(mu=0.9)).report())


def wedge_fringe_map(grid, eps3=0.0):
    x = np.arange(-4, 4.001, 0.05)
    k = np.arange(-4, 4.001, 0.25)
    return wigner_map(wedge_beam(grid, eps3=eps3), x, k)


def test_fringe_frequency_midpoint(grid512):
    wmap = wedge_fringe_map(grid512)
    assert fringe_frequency(wmap, 0.0) == pytest.approx(6.0, abs=fringe_resolution(wmap))


def test_ripple_twice_fringe(grid512):
    wmap = wedge_fringe_map(grid512, eps3=0.1)
    mid = fringe_frequency(wmap, 0.0)
    ripple = fringe_frequency(wmap, -3.0)
    assert ripple == pytest.approx(2 * mid, abs=fringe_resolution(wmap))


def test_single_gaussian_no_peak(grid512):
    x = np.arange(-4, 4.001, 0.05)
    wmap = wigner_map(make_gaussian(grid512), x, np.array([-1.0, 0.0, 1.0]))
    for k in (-1.0, 0.0, 1.0):
        with pytest.raises(NoPeak):
            fringe_frequency(wmap, k)


def test_fringe_missing_row(grid512):
    wmap = wedge_fringe_map(grid512)
    with pytest.raises(InvalidParam):
        fringe_frequency(wmap, 100.0)
