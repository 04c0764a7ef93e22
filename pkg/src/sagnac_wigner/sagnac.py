"""Sagnac interferometer with a Dove prism and area-integrating detectors.

The steering mirror moves the phase-space point (x, k) onto the
interferometer axis, the beam splitter makes two counter-propagating
replicas, the Dove prism leaves them mutually reflected (xi -> -xi in one
dimension) and the two output ports integrate the recombined power.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ClippedBeam, InvalidParam, NonRectangularScan, OffGrid, PhaseNull
from .field import Field1D, as_ensemble, total_power
from .wigner import WignerMap

CLIP_TOLERANCE = 1e-6
MIN_ABS_COS = 0.05


@dataclass(frozen=True)
class MirrorSetting:
    """Phase-space point probed by the steering mirror (displacement, tilt)."""

    x: float
    k: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.k)):
            raise InvalidParam("mirror setting must be finite")


@dataclass(frozen=True)
class InterferometerConfig:
    phase: float = 0.0
    phase_jitter_sigma: float = 0.0
    split_imbalance: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.phase_jitter_sigma >= 0:
            raise InvalidParam("phase_jitter_sigma must be >= 0")
        if not abs(self.split_imbalance) <= 0.1:
            raise InvalidParam("split_imbalance must lie in [-0.1, 0.1]")

    @property
    def transmission_reflection(self) -> tuple[float, float]:
        eps = self.split_imbalance
        return math.sqrt(0.5 + eps), math.sqrt(0.5 - eps)

    def point_phase(self, index: int) -> float:
        """Relative phase at scan point ``index``, jitter drawn from its own substream."""
        if self.phase_jitter_sigma == 0:
            return self.phase
        rng = point_rng(self.seed, index)
        return self.phase + self.phase_jitter_sigma * rng.standard_normal()


def point_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for one scan point, derived from (seed, index)."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))


@dataclass(frozen=True, eq=False)
class ScanResult:
    settings: tuple
    bright: np.ndarray
    dark: np.ndarray
    total_power: float
    config: InterferometerConfig
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "settings", tuple(self.settings))
        for name in ("bright", "dark"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (len(self.settings),):
                raise ValueError(f"{name} must have one entry per setting")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def config_dict(self) -> dict:
        return asdict(self.config)


def _shift_index(field: Field1D, x: float) -> int:
    g = field.grid
    s = (x - g.x_center) / g.dx
    s_int = round(s)
    if abs(s - s_int) > 1e-9 * max(1.0, abs(s)):
        raise OffGrid(f"mirror displacement {x} is not a multiple of dx = {g.dx}")
    return int(s_int)


def _shifted(samples: np.ndarray, s: int) -> np.ndarray:
    n = samples.size
    out = np.zeros(n, dtype=complex)
    lo, hi = max(0, -s), min(n, n - s)
    if lo < hi:
        out[lo:hi] = samples[lo + s:hi + s]
    return out


def _clip_error(setting: MirrorSetting, lost: float, before: float) -> ClippedBeam:
    return ClippedBeam(
        f"setting (x={setting.x:g}, k={setting.k:g}) clips {lost / before:.2e} of the beam power",
        setting,
    )


def _steer(field: Field1D, setting: MirrorSetting) -> tuple[Field1D, float]:
    g = field.grid
    moved = _shifted(field.samples, _shift_index(field, setting.x))
    lost = field.power - float(np.sum(np.abs(moved[1:]) ** 2) * g.dx)
    ramp = np.exp(1j * setting.k * g.offsets * g.dx)
    return Field1D(g, ramp * moved), max(lost, 0.0)


def steer(field: Field1D, setting: MirrorSetting) -> Field1D:
    """Displace by ``setting.x`` and tilt by ``setting.k``: ``E'(xi) = e^{i k xi} E(x + xi)``.

    Raises ClippedBeam when more than 1e-6 of the power leaves the
    parity-closed window (grid samples 1..n-1; sample 0 has no mirror partner).
    """
    out, lost = _steer(field, setting)
    before = field.power
    if before > 0 and lost > CLIP_TOLERANCE * before:
        raise _clip_error(setting, lost, before)
    return out


def parity(field: Field1D) -> Field1D:
    """Reflect about the grid pivot: sample j <-> n - j, sample 0 fixed."""
    s = field.samples
    return Field1D(field.grid, np.concatenate([s[:1], s[:0:-1]]))


def replica_overlap(steered: Field1D) -> complex:
    """``int A*(-xi) A(xi) dxi`` over the parity-closed window (real for any A)."""
    a = steered.samples
    mirrored = parity(steered).samples
    return complex(np.sum(mirrored[1:].conj() * a[1:]) * steered.grid.dx)


def port_intensities(ensemble, setting: MirrorSetting, config: InterferometerConfig | None = None, index: int = 0):
    """Area-integrated power at the (bright, dark) output ports.

    ``bright = S/2 + t r cos(phi) O`` and ``dark = S/2 - t r cos(phi) O``,
    where O is the ensemble-averaged replica overlap and t, r the splitter
    amplitudes (t = r = 1/sqrt(2) for a balanced splitter).
    """
    ens = as_ensemble(ensemble)
    config = config or InterferometerConfig()
    s_total = total_power(ens)
    overlap = 0.0
    lost = 0.0
    for w, f in ens.modes:
        a, mode_lost = _steer(f, setting)
        lost += w * mode_lost
        if w:
            overlap += w * replica_overlap(a).real
    if s_total > 0 and lost > CLIP_TOLERANCE * s_total:
        raise _clip_error(setting, lost, s_total)
    phi = config.point_phase(index)
    t, r = config.transmission_reflection
    fringe = t * r * math.cos(phi) * overlap
    return max(0.5 * s_total + fringe, 0.0), max(0.5 * s_total - fringe, 0.0)


def run_scan(ensemble, settings, config: InterferometerConfig | None = None) -> ScanResult:
    """Record both port intensities for every mirror setting."""
    ens = as_ensemble(ensemble)
    config = config or InterferometerConfig()
    settings = tuple(settings)
    bright = np.empty(len(settings))
    dark = np.empty(len(settings))
    for i, st in enumerate(settings):
        try:
            bright[i], dark[i] = port_intensities(ens, st, config, index=i)
        except ClippedBeam as exc:
            raise ClippedBeam(f"scan point {i}: {exc}", st) from None
    return ScanResult(settings, bright, dark, total_power(ens), config, ens.digest())


def grid_settings(x_axis, k_axis) -> tuple:
    """Row-major (x outer, k inner) list of settings for a rectangular scan."""
    return tuple(MirrorSetting(float(x), float(k)) for x in x_axis for k in k_axis)


def rectangular_layout(settings):
    """Axes and (row, col) placement for settings forming a full x-by-k grid."""
    xs = np.array(sorted({s.x for s in settings}))
    ks = np.array(sorted({s.k for s in settings}))
    if xs.size * ks.size != len(settings):
        raise NonRectangularScan(f"{len(settings)} settings do not fill a {xs.size} x {ks.size} grid")
    xi = {x: i for i, x in enumerate(xs)}
    ki = {k: j for j, k in enumerate(ks)}
    rows = np.array([xi[s.x] for s in settings])
    cols = np.array([ki[s.k] for s in settings])
    seen = np.zeros((xs.size, ks.size), dtype=bool)
    seen[rows, cols] = True
    if not seen.all():
        raise NonRectangularScan("scan settings repeat points and miss others")
    return xs, ks, rows, cols


def check_phase(phase: float) -> float:
    c = math.cos(phase)
    if abs(c) <= MIN_ABS_COS:
        raise PhaseNull(f"|cos(phase)| = {abs(c):.3g} <= {MIN_ABS_COS}; interference term is unrecoverable")
    return c


def reconstruct_wigner(scan: ScanResult, method: str = "two_port") -> WignerMap:
    """Wigner map from recorded port intensities.

    ``single_port_pedestal`` subtracts the constant pedestal S/2 from the
    bright port, ``two_port`` subtracts the two photocurrents; both divide by
    ``pi cos(phase)`` using the declared phase.
    """
    c = check_phase(scan.config.phase)
    xs, ks, rows, cols = rectangular_layout(scan.settings)
    if method == "two_port":
        w = (scan.bright - scan.dark) / (math.pi * c)
    elif method == "single_port_pedestal":
        w = (scan.bright - 0.5 * scan.total_power) * 2 / (math.pi * c)
    else:
        raise InvalidParam(f"unknown reconstruction method {method!r}")
    values = np.zeros((xs.size, ks.size))
    values[rows, cols] = w
    meta = {
        "method": f"apparatus:{method}",
        "phase": scan.config.phase,
        "source": scan.source,
        "total_power": scan.total_power,
    }
    return WignerMap(xs, ks, values, meta)
