import json

import numpy as np
import pytest

from sagnac_wigner import fileio
from sagnac_wigner.entangle import make_epr
from sagnac_wigner.field import Ensemble, Grid1D, make_gaussian, make_hermite_gauss
from sagnac_wigner.photons import estimate_wigner, photon_scan
from sagnac_wigner.sagnac import InterferometerConfig, grid_settings, run_scan
from sagnac_wigner.wigner import wigner_map


def test_field_roundtrip(tmp_path, grid):
    f = make_gaussian(grid, k_c=0.7, c=0.2)
    back = fileio.load_field(fileio.save_field(tmp_path / "f.csv", f))
    assert back.grid == grid
    assert np.array_equal(back.samples, f.samples)


def test_ensemble_roundtrip(tmp_path, grid):
    ens = Ensemble(((0.25, make_gaussian(grid)), (0.75, make_hermite_gauss(grid, 2))))
    back = fileio.load_ensemble(fileio.save_ensemble(tmp_path / "bundle", ens))
    assert back.digest() == ens.digest()


def test_map_roundtrip(tmp_path, grid, axis33):
    wmap = wigner_map(make_gaussian(grid), axis33, axis33)
    written = fileio.save_map(tmp_path / "m", wmap)
    assert {p.name for p in written} == {"m.csv", "m.pgm", "m.json"}
    back = fileio.load_map(tmp_path / "m.csv")
    assert np.array_equal(back.values, wmap.values)
    assert np.array_equal(back.x_axis, wmap.x_axis)
    assert back.meta["source"] == wmap.meta["source"]
    scale = json.loads((tmp_path / "m.json").read_text())["pgm_scale"]
    assert scale["max"] == pytest.approx(1 / np.pi)


def test_pgm_orientation(tmp_path, grid):
    x = np.linspace(-2, 2, 17)
    k = np.linspace(-2, 2, 9)
    wmap = wigner_map(make_gaussian(grid, x_c=1.0, k_c=1.0), x, k)
    fileio.save_map(tmp_path / "m", wmap, ("pgm",))
    img = fileio.read_pgm(tmp_path / "m.pgm")
    assert img.shape == (k.size, x.size)
    row, col = np.unravel_index(np.argmax(img), img.shape)
    # x grows to the right, k grows upward
    assert x[col] == 1.0
    assert k[::-1][row] == 1.0
    assert img.max() == 255 and img.min() == 0


def test_scan_roundtrip(tmp_path, grid):
    cfg = InterferometerConfig(phase=0.1, phase_jitter_sigma=0.05, seed=4)
    scan = run_scan(make_gaussian(grid), grid_settings([0.0, 0.125], [0.0, 0.5]), cfg)
    back = fileio.load_scan(fileio.save_scan(tmp_path / "s.csv", scan))
    assert back.config == cfg
    assert np.array_equal(back.bright, scan.bright)
    assert back.settings == scan.settings
    assert back.source == scan.source
    header = (tmp_path / "s.csv").read_text().splitlines()
    assert "x,k,bright,dark" in header


def test_counts_roundtrip(tmp_path, grid):
    recs = photon_scan(make_gaussian(grid), grid_settings([0.0, 0.125], [0.0, 0.5]), 500, seed=2)
    fileio.save_counts(tmp_path / "c.csv", recs, 1.0, 0.0)
    back, s_total, phase = fileio.load_counts(tmp_path / "c.csv")
    assert back == recs
    assert (s_total, phase) == (1.0, 0.0)


def test_stderr_file(tmp_path, grid):
    recs = photon_scan(make_gaussian(grid), grid_settings([0.0, 0.125], [0.0, 0.5]), 500, seed=2)
    wmap = estimate_wigner(recs, 1.0)
    fileio.save_map(tmp_path / "r", wmap, ("csv",))
    err = fileio.load_map(tmp_path / "r_stderr.csv")
    assert np.array_equal(err.values, wmap.meta["stderr"])


def test_joint_field_roundtrip(tmp_path):
    g = Grid1D(24, 0.6)
    psi = make_epr(g, g, 0.8, 1.0)
    back = fileio.load_joint_field(fileio.save_joint_field(tmp_path / "j.csv", psi))
    assert np.array_equal(back.samples, psi.samples)
    assert back.grid2 == g
