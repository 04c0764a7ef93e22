"""Two-photon spatial states measured with a pair of Sagnac interferometers.

Each photon goes to its own interferometer; with both relative phases at
zero the two port pairs realize displaced parity measurements, so the
coincidence correlation equals ``pi^2 W2(x1, k1, x2, k2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ClippedBeam, GridTooNarrow, InvalidParam, OffGrid
from .field import EDGE_FRACTION, Ensemble, Field1D, Grid1D
from .sagnac import CLIP_TOLERANCE, MirrorSetting, _shifted
from .wigner import _pairs


@dataclass(frozen=True, eq=False)
class JointField:
    grid1: Grid1D
    grid2: Grid1D
    samples: np.ndarray

    def __post_init__(self):
        s = np.array(self.samples, dtype=complex)
        if s.shape != (self.grid1.n, self.grid2.n):
            raise InvalidParam(f"samples shape {s.shape} does not match grids ({self.grid1.n}, {self.grid2.n})")
        if not np.all(np.isfinite(s)):
            raise InvalidParam("joint samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def cell(self) -> float:
        return self.grid1.dx * self.grid2.dx

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.cell)


def _check_edges(s: np.ndarray):
    peak = np.abs(s).max()
    edge = max(np.abs(s[0]).max(), np.abs(s[-1]).max(), np.abs(s[:, 0]).max(), np.abs(s[:, -1]).max())
    if peak > 0 and edge >= EDGE_FRACTION * peak:
        raise GridTooNarrow(f"two-photon state reaches {edge / peak:.2e} of its peak at the grid edge")


def make_epr(grid1: Grid1D, grid2: Grid1D, sigma_minus: float, sigma_plus: float) -> JointField:
    """Gaussian-regularized EPR pair, normalized on the grid.

    ``psi ~ exp(-(x1 - x2)^2 / (4 sigma_minus^2) - (x1 + x2)^2 / (4 sigma_plus^2))``;
    sigma_minus << sigma_plus gives tightly correlated positions, equal
    widths give a product of Gaussians.
    """
    if not (sigma_minus > 0 and sigma_plus > 0):
        raise InvalidParam("sigma_minus and sigma_plus must be > 0")
    x1, x2 = np.meshgrid(grid1.x, grid2.x, indexing="ij")
    psi = np.exp(-((x1 - x2) ** 2) / (4 * sigma_minus**2) - ((x1 + x2) ** 2) / (4 * sigma_plus**2))
    _check_edges(psi)
    psi = psi / math.sqrt(np.sum(psi**2) * grid1.dx * grid2.dx)
    return JointField(grid1, grid2, psi.astype(complex))


def product_state(f1: Field1D, f2: Field1D) -> JointField:
    return JointField(f1.grid, f2.grid, np.outer(f1.samples, f2.samples))


def reduced_ensemble(psi: JointField, photon: int = 1, cutoff: float = 1e-14) -> Ensemble:
    """Single-photon state of one photon after tracing out the other (Schmidt modes)."""
    s = psi.samples if photon == 1 else psi.samples.T
    grid = psi.grid1 if photon == 1 else psi.grid2
    other = psi.grid2 if photon == 1 else psi.grid1
    u, sv, _ = np.linalg.svd(s, full_matrices=False)
    weights = sv**2 * grid.dx * other.dx
    keep = weights > cutoff * weights.max()
    modes = [(w, Field1D(grid, u[:, m] / math.sqrt(grid.dx))) for m, w in enumerate(weights) if keep[m]]
    return Ensemble(tuple(modes))


def schmidt_rank(psi: JointField, cutoff: float = 1e-10) -> int:
    sv = np.linalg.svd(psi.samples, compute_uv=False)
    return int(np.sum(sv**2 > cutoff * (sv**2).sum()))


def joint_wigner_slice(psi: JointField, x1: float, x2: float, k1_axis, k2_axis) -> np.ndarray:
    """``W2(x1, k1, x2, k2)`` on a (k1, k2) grid at fixed positions.

    ``(1/pi^2) Re sum exp(2i k1 xi1 + 2i k2 xi2) psi*(x - xi) psi(x + xi) dxi1 dxi2``.
    """
    a1, b1, xi1 = _pairs(psi.grid1, x1)
    a2, b2, xi2 = _pairs(psi.grid2, x2)
    k1_axis = np.atleast_1d(np.asarray(k1_axis, dtype=float))
    k2_axis = np.atleast_1d(np.asarray(k2_axis, dtype=float))
    if xi1.size == 0 or xi2.size == 0:
        return np.zeros((k1_axis.size, k2_axis.size))
    s = psi.samples
    prod = s[np.ix_(a1, a2)].conj() * s[np.ix_(b1, b2)]
    ph1 = np.exp(2j * np.outer(k1_axis, xi1))
    ph2 = np.exp(2j * np.outer(xi2, k2_axis))
    return (ph1 @ prod @ ph2).real * (psi.cell / math.pi**2)


def joint_wigner_point(psi: JointField, x1: float, k1: float, x2: float, k2: float) -> float:
    return float(joint_wigner_slice(psi, x1, x2, [k1], [k2])[0, 0])


def _axis_shift(grid: Grid1D, x: float) -> int:
    s = (x - grid.x_center) / grid.dx
    s_int = round(s)
    if abs(s - s_int) > 1e-9 * max(1.0, abs(s)):
        raise OffGrid(f"displacement {x} is not a multiple of dx = {grid.dx}")
    return int(s_int)


def _steer_joint(psi: JointField, s1: MirrorSetting, s2: MirrorSetting) -> np.ndarray:
    g1, g2 = psi.grid1, psi.grid2
    m1 = _axis_shift(g1, s1.x)
    m2 = _axis_shift(g2, s2.x)
    moved = np.apply_along_axis(_shifted, 0, psi.samples, m1)
    moved = np.apply_along_axis(_shifted, 1, moved, m2)
    before = psi.norm
    kept = float(np.sum(np.abs(moved[1:, 1:]) ** 2) * psi.cell)
    if before > 0 and before - kept > CLIP_TOLERANCE * before:
        raise ClippedBeam(f"settings {s1}, {s2} clip {(before - kept) / before:.2e} of the pair", (s1, s2))
    ramp1 = np.exp(1j * s1.k * g1.offsets * g1.dx)
    ramp2 = np.exp(1j * s2.k * g2.offsets * g2.dx)
    return moved * ramp1[:, None] * ramp2[None, :]


def _reflect(a: np.ndarray, axis: int) -> np.ndarray:
    """Parity about the pivot along one axis (sample 0 stays put)."""
    a = np.moveaxis(a, axis, 0)
    out = np.concatenate([a[:1], a[:0:-1]])
    return np.moveaxis(out, 0, axis)


def coincidence_probabilities(psi: JointField, s1: MirrorSetting, s2: MirrorSetting, phi1: float = 0.0, phi2: float = 0.0):
    """Born-rule probabilities (p_bb, p_bd, p_db, p_dd) at the four port pairs.

    Each interferometer maps an input amplitude A to ``(A + e^{i phi} P A)/2``
    at the bright port and ``(A - e^{i phi} P A)/2`` at the dark port, P the
    mirror reflection.
    """
    a = _steer_joint(psi, s1, s2)
    r1 = np.exp(1j * phi1) * _reflect(a, 0)
    ports1 = {"b": 0.5 * (a + r1), "d": 0.5 * (a - r1)}
    probs = {}
    for p1, amp in ports1.items():
        r2 = np.exp(1j * phi2) * _reflect(amp, 1)
        for p2, out in (("b", 0.5 * (amp + r2)), ("d", 0.5 * (amp - r2))):
            probs[p1 + p2] = float(np.sum(np.abs(out) ** 2) * psi.cell)
    return probs["bb"], probs["bd"], probs["db"], probs["dd"]


def parity_correlation(psi: JointField, s1: MirrorSetting, s2: MirrorSetting, route: str = "wigner") -> float:
    """Joint displaced-parity correlation ``E(s1, s2)``.

    ``route="wigner"`` evaluates ``pi^2 W2`` directly; ``route="ports"``
    combines the coincidence probabilities as ``p_bb - p_bd - p_db + p_dd``.
    """
    if route == "wigner":
        return math.pi**2 * joint_wigner_point(psi, s1.x, s1.k, s2.x, s2.k) / psi.norm
    if route == "ports":
        p_bb, p_bd, p_db, p_dd = coincidence_probabilities(psi, s1, s2)
        return (p_bb - p_bd - p_db + p_dd) / psi.norm
    raise InvalidParam(f"unknown route {route!r}")


def chsh(psi: JointField, a: MirrorSetting, a_prime: MirrorSetting, b: MirrorSetting, b_prime: MirrorSetting) -> float:
    """``B = E(a, b) + E(a', b) + E(a, b') - E(a', b')``."""
    e = parity_correlation
    return e(psi, a, b) + e(psi, a_prime, b) + e(psi, a, b_prime) - e(psi, a_prime, b_prime)


def displacement_settings(d: float):
    """The (a, a', b, b') family a = b = (0, 0), a' = (d, 0), b' = (-d, 0)."""
    origin = MirrorSetting(0.0, 0.0)
    return origin, MirrorSetting(d, 0.0), origin, MirrorSetting(-d, 0.0)
