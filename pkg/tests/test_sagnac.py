import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from sagnac_wigner.errors import ClippedBeam, InvalidParam, NonRectangularScan, OffGrid, PhaseNull
from sagnac_wigner.field import Field1D, Grid1D, make_gaussian, make_hermite_gauss, wedge_beam
from sagnac_wigner.sagnac import (
    InterferometerConfig,
    MirrorSetting,
    grid_settings,
    parity,
    port_intensities,
    reconstruct_wigner,
    replica_overlap,
    run_scan,
    steer,
)
from sagnac_wigner.wigner import wigner_map


def test_overlap_of_displaced_gaussian_matches_quadrature(grid):
    # int A*(-xi) A(xi) dxi with A(xi) = E(3 + xi): two Gaussians 6 apart overlap as exp(-9)
    ref, _ = integrate.quad(lambda t: math.exp(-((3 - t) ** 2) / 2 - (3 + t) ** 2 / 2) / math.sqrt(math.pi), -20, 20)
    assert ref == pytest.approx(math.exp(-9), rel=1e-10)
    a = steer(make_gaussian(grid), MirrorSetting(3.0, 0.0))
    assert replica_overlap(a).real == pytest.approx(ref, rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=16, max_size=16))
def test_parity_is_involution(values):
    f = Field1D(Grid1D(16, 0.3), np.array(values))
    assert np.array_equal(parity(parity(f)).samples, f.samples)


@settings(max_examples=30, deadline=None)
@given(st.integers(-20, 20), st.floats(-3, 3))
def test_steer_conserves_power(shift, k):
    g = Grid1D(256, 0.125)
    f = make_gaussian(g)
    out = steer(f, MirrorSetting(shift * g.dx, k))
    assert out.power == pytest.approx(f.power, abs=1e-12)


def test_steer_off_grid(grid):
    with pytest.raises(OffGrid):
        steer(make_gaussian(grid), MirrorSetting(0.01, 0.0))


def test_steer_clips(grid):
    with pytest.raises(ClippedBeam) as info:
        steer(make_gaussian(grid), MirrorSetting(14.0, 0.0))
    assert info.value.setting == MirrorSetting(14.0, 0.0)


def test_overlap_is_real(grid):
    f = make_hermite_gauss(grid, 2, x_c=0.3)
    a = steer(f, MirrorSetting(0.5, 1.3))
    assert abs(replica_overlap(a).imag) < 1e-15


def test_energy_and_pedestal(grid, axis33):
    ens = wedge_beam(Grid1D(256, 0.125), c=0.2)
    scan = run_scan(ens, grid_settings(axis33, axis33))
    total = scan.bright + scan.dark
    assert np.max(np.abs(total - scan.total_power)) < 1e-12
    assert np.ptp(total) < 1e-12


def test_overlap_equals_pi_w(grid):
    f = make_hermite_gauss(grid, 3)
    for x, k in [(0.0, 0.0), (0.5, -1.0), (-1.25, 0.75)]:
        bright, dark = port_intensities(f, MirrorSetting(x, k))
        ref = wigner_map(f, [x], [k]).values[0, 0]
        assert (bright - dark) / math.pi == pytest.approx(ref, abs=1e-14)


@pytest.mark.parametrize("method", ["two_port", "single_port_pedestal"])
def test_reconstruction_matches_oracle(grid, axis33, method):
    f = make_gaussian(grid, a=0.9, c=0.3, k_c=0.5)
    scan = run_scan(f, grid_settings(axis33, axis33))
    rec = reconstruct_wigner(scan, method)
    ref = wigner_map(f, axis33, axis33)
    assert np.max(np.abs(rec.values - ref.values)) < 1e-12
    assert rec.meta["method"] == f"apparatus:{method}"


def test_phase_pi_flips_ports(grid):
    f = make_gaussian(grid)
    b0, d0 = port_intensities(f, MirrorSetting(0, 0), InterferometerConfig(phase=0.0))
    b1, d1 = port_intensities(f, MirrorSetting(0, 0), InterferometerConfig(phase=math.pi))
    assert b0 == pytest.approx(d1, abs=1e-15) and d0 == pytest.approx(b1, abs=1e-15)
    # a reconstruction that declares phase = pi still recovers W
    scan = run_scan(f, grid_settings([0.0, 0.125], [0.0, 0.125]), InterferometerConfig(phase=math.pi))
    rec = reconstruct_wigner(scan)
    assert rec.values[0, 0] == pytest.approx(1 / math.pi, abs=1e-14)


def test_phase_null(grid):
    scan = run_scan(make_gaussian(grid), grid_settings([0.0], [0.0]), InterferometerConfig(phase=math.pi / 2))
    with pytest.raises(PhaseNull):
        reconstruct_wigner(scan)


def test_split_imbalance_reduces_visibility(grid):
    f = make_gaussian(grid)
    eps = 0.05
    b, d = port_intensities(f, MirrorSetting(0, 0), InterferometerConfig(split_imbalance=eps))
    t, r = math.sqrt(0.5 + eps), math.sqrt(0.5 - eps)
    assert (b - d) == pytest.approx(2 * t * r * 1.0, abs=1e-14)
    assert b + d == pytest.approx(1.0, abs=1e-14)


def test_invalid_config():
    with pytest.raises(InvalidParam):
        InterferometerConfig(phase_jitter_sigma=-1)
    with pytest.raises(InvalidParam):
        InterferometerConfig(split_imbalance=0.3)


def test_jitter_is_seeded_per_point(grid):
    f = make_gaussian(grid)
    settings_ = grid_settings(np.arange(-1, 1.01, 0.25), [0.0, 0.5])
    cfg = InterferometerConfig(phase_jitter_sigma=0.2, seed=11)
    a = run_scan(f, settings_, cfg)
    b = run_scan(f, settings_, cfg)
    assert np.array_equal(a.bright, b.bright)
    c = run_scan(f, settings_, InterferometerConfig(phase_jitter_sigma=0.2, seed=12))
    assert not np.array_equal(a.bright, c.bright)
    # the jitter at point i does not depend on how many points precede it
    short = run_scan(f, settings_[:3], cfg)
    assert np.array_equal(short.bright, a.bright[:3])


def test_scan_clip_reports_point(grid):
    with pytest.raises(ClippedBeam, match="scan point 1") as info:
        run_scan(make_gaussian(grid), [MirrorSetting(0, 0), MirrorSetting(15.0, 0)])
    assert info.value.setting.x == 15.0


def test_non_rectangular(grid):
    scan = run_scan(make_gaussian(grid), [MirrorSetting(0, 0), MirrorSetting(0.125, 0), MirrorSetting(0, 0.5)])
    with pytest.raises(NonRectangularScan):
        reconstruct_wigner(scan)
