"""Single-photon version of the measurement.

For a one-photon input the normalized field is the photon's transverse wave
function, so the port intensities divided by the total power are click
probabilities at the two detectors. Counts are Binomial with a fixed number
of photons per mirror setting.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParam, ZeroPower
from .field import as_ensemble, total_power
from .sagnac import (
    InterferometerConfig,
    MirrorSetting,
    check_phase,
    point_rng,
    port_intensities,
    rectangular_layout,
)
from .wigner import WignerMap


@dataclass(frozen=True)
class CountRecord:
    setting: MirrorSetting
    n_bright: int
    n_dark: int
    n_total: int
    seed: int = 0

    def __post_init__(self):
        if min(self.n_bright, self.n_dark) < 0 or self.n_bright + self.n_dark > self.n_total:
            raise InvalidParam(f"inconsistent counts {self.n_bright} + {self.n_dark} > {self.n_total}")


def click_probability(ensemble, setting: MirrorSetting, phase: float = 0.0) -> tuple[float, float]:
    ens = as_ensemble(ensemble)
    s_total = total_power(ens)
    if not s_total > 0:
        raise ZeroPower("click probabilities need a nonzero input power")
    bright, dark = port_intensities(ens, setting, InterferometerConfig(phase=phase))
    p_bright = min(max(bright / s_total, 0.0), 1.0)
    return p_bright, 1.0 - p_bright


def sample_counts(ensemble, setting: MirrorSetting, n_total: int, phase: float = 0.0, seed: int = 0, index: int = 0) -> CountRecord:
    """Send ``n_total`` photons at one setting; the substream is fixed by (seed, index)."""
    if int(n_total) != n_total or n_total < 1:
        raise InvalidParam(f"n_total must be a positive integer, got {n_total}")
    p_bright, _ = click_probability(ensemble, setting, phase)
    n_bright = int(point_rng(seed, index).binomial(int(n_total), p_bright))
    return CountRecord(setting, n_bright, int(n_total) - n_bright, int(n_total), int(seed))


def photon_scan(ensemble, settings, n_total: int, phase: float = 0.0, seed: int = 0) -> list[CountRecord]:
    ens = as_ensemble(ensemble)
    return [sample_counts(ens, s, n_total, phase, seed, index=i) for i, s in enumerate(settings)]


def wigner_from_probabilities(p_bright, p_dark, s_total: float, phase: float):
    """Wigner estimate from observed (or exact) click fractions."""
    c = check_phase(phase)
    p_bright = np.asarray(p_bright, dtype=float)
    p_dark = np.asarray(p_dark, dtype=float)
    w = s_total * (p_bright - p_dark) / (math.pi * c)
    return w


def estimate_wigner(records, s_total: float, phase: float = 0.0) -> WignerMap:
    """``W = S (n_b - n_d) / (n pi cos(phase))`` with Binomial standard errors.

    The standard error ``2 S sqrt(p (1 - p) / n) / (pi |cos(phase)|)`` per point
    is attached as ``meta["stderr"]``.
    """
    c = check_phase(phase)
    records = list(records)
    xs, ks, rows, cols = rectangular_layout([r.setting for r in records])
    n = np.array([r.n_total for r in records], dtype=float)
    p_b = np.array([r.n_bright for r in records]) / n
    p_d = np.array([r.n_dark for r in records]) / n
    w = wigner_from_probabilities(p_b, p_d, s_total, phase)
    se = 2 * s_total * np.sqrt(p_b * (1 - p_b) / n) / (math.pi * abs(c))
    values = np.zeros((xs.size, ks.size))
    errors = np.zeros_like(values)
    values[rows, cols] = w
    errors[rows, cols] = se
    seeds = sorted({r.seed for r in records})
    meta = {
        "method": "photon_counting",
        "phase": phase,
        "total_power": s_total,
        "seed": seeds[0] if len(seeds) == 1 else seeds,
        "stderr": errors,
    }
    return WignerMap(xs, ks, values, meta)
