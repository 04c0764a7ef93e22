"""One-dimensional transverse fields, partially coherent ensembles and beams.

Lengths are in beam units (a reference waist w0) and transverse frequencies
in 1/w0. The sign convention throughout the package follows the Wigner
kernel exp(+2 i k xi): a beam travelling with transverse wave vector k_c
carries the linear phase exp(-i k_c x), and its Wigner lobe sits at k = k_c.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import GridMismatch, GridTooNarrow, InvalidParam, LengthMismatch

EDGE_FRACTION = 1e-6


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid ``x_j = x_center + (j - n/2) dx`` with parity pivot at ``n/2``."""

    n: int
    dx: float
    x_center: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8 or self.n % 2:
            raise InvalidParam(f"grid n must be an even integer >= 8, got {self.n}")
        if not (self.dx > 0 and math.isfinite(self.dx)):
            raise InvalidParam(f"grid dx must be positive, got {self.dx}")
        if not math.isfinite(self.x_center):
            raise InvalidParam("grid x_center must be finite")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "dx", float(self.dx))
        object.__setattr__(self, "x_center", float(self.x_center))

    @property
    def pivot(self) -> int:
        return self.n // 2

    @property
    def offsets(self) -> np.ndarray:
        """Integer offsets ``j - n/2`` of every sample from the pivot."""
        return np.arange(self.n) - self.pivot

    @property
    def x(self) -> np.ndarray:
        return self.x_center + self.offsets * self.dx

    @property
    def half_width(self) -> float:
        return 0.5 * self.n * self.dx

    def half_index(self, x: float, tol: float = 1e-9) -> int | None:
        """Return ``2 (x - x_0)/dx`` if it is an integer (within ``tol``), else None.

        Even values are grid points, odd values are midpoints between samples.
        """
        t = 2.0 * (x - self.x[0]) / self.dx
        p = round(t)
        if abs(t - p) > tol * max(1.0, abs(t)):
            return None
        return int(p)

    def index(self, x: float, tol: float = 1e-9) -> int | None:
        p = self.half_index(x, tol)
        if p is None or p % 2:
            return None
        return p // 2


@dataclass(frozen=True, eq=False)
class Field1D:
    grid: Grid1D
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        if samples.shape != (self.grid.n,):
            raise LengthMismatch(f"field has {samples.shape} samples, grid expects ({self.grid.n},)")
        if not np.all(np.isfinite(samples)):
            raise InvalidParam("field samples must be finite")
        object.__setattr__(self, "samples", _frozen(samples))

    @property
    def power(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.grid.dx)

    def check_edges(self, what: str = "field") -> None:
        peak = np.max(np.abs(self.samples))
        edge = max(abs(self.samples[0]), abs(self.samples[-1]))
        if peak > 0 and edge >= EDGE_FRACTION * peak:
            raise GridTooNarrow(
                f"{what}: edge amplitude {edge / peak:.2e} of peak exceeds {EDGE_FRACTION:g}; widen the grid"
            )


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Weighted set of coherent modes; ``Gamma(x1, x2) = sum w_i E_i*(x1) E_i(x2)``."""

    modes: tuple

    def __post_init__(self):
        modes = tuple((float(w), f) for w, f in self.modes)
        if not modes:
            raise InvalidParam("ensemble needs at least one mode")
        grid = modes[0][1].grid
        for w, f in modes:
            if not (w >= 0 and math.isfinite(w)):
                raise InvalidParam(f"mode weights must be finite and >= 0, got {w}")
            if f.grid != grid:
                raise GridMismatch("all ensemble modes must share one grid")
        object.__setattr__(self, "modes", modes)

    @classmethod
    def pure(cls, field: Field1D) -> Ensemble:
        return cls(((1.0, field),))

    @property
    def grid(self) -> Grid1D:
        return self.modes[0][1].grid

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.modes])

    @property
    def stack(self) -> np.ndarray:
        """Mode samples as an (m, n) array."""
        return np.stack([f.samples for _, f in self.modes])

    def coherence(self) -> np.ndarray:
        """Mutual coherence matrix ``G[i, j] = Gamma(x_i, x_j)``."""
        e = self.stack
        return np.einsum("m,mi,mj->ij", self.weights, e.conj(), e)

    def digest(self) -> str:
        h = hashlib.sha256()
        g = self.grid
        h.update(repr((g.n, g.dx, g.x_center)).encode())
        for w, f in self.modes:
            h.update(np.float64(w).tobytes())
            h.update(f.samples.tobytes())
        return h.hexdigest()[:16]


def as_ensemble(obj) -> Ensemble:
    if isinstance(obj, Ensemble):
        return obj
    if isinstance(obj, Field1D):
        return Ensemble.pure(obj)
    raise TypeError(f"expected Field1D or Ensemble, got {type(obj).__name__}")


def make_gaussian(grid: Grid1D, x_c: float = 0.0, a: float = 1.0, k_c: float = 0.0, c: float = 0.0) -> Field1D:
    """Unit-power Gaussian beam.

    ``E(x) = (pi a^2)^(-1/4) exp(-(x - x_c)^2 / (2 a^2) - i k_c (x - x_c) + i c (x - x_c)^2)``

    ``k_c`` is the central transverse wave vector (the Wigner lobe sits at
    ``k = k_c``); a positive chirp ``c`` converges the beam, so its Wigner
    function is ``W0(x, k + 2 c x)``.
    """
    if not a > 0:
        raise InvalidParam(f"width a must be > 0, got {a}")
    u = grid.x - x_c
    amp = (math.pi * a * a) ** -0.25
    samples = amp * np.exp(-(u**2) / (2 * a * a) - 1j * k_c * u + 1j * c * u**2)
    field = Field1D(grid, samples)
    field.check_edges("gaussian")
    return field


def make_hermite_gauss(grid: Grid1D, order: int, a: float = 1.0, x_c: float = 0.0) -> Field1D:
    """Unit-power Hermite-Gauss mode of the given order, parity ``(-1)**order``."""
    if not a > 0:
        raise InvalidParam(f"width a must be > 0, got {a}")
    if int(order) != order or not 0 <= order <= 20:
        raise InvalidParam(f"order must be an integer in [0, 20], got {order}")
    s = (grid.x - x_c) / a
    # normalized Hermite functions by the stable three-term recurrence
    prev = np.zeros_like(s)
    cur = math.pi**-0.25 * np.exp(-(s**2) / 2)
    for j in range(int(order)):
        prev, cur = cur, math.sqrt(2.0 / (j + 1)) * s * cur - math.sqrt(j / (j + 1)) * prev
    field = Field1D(grid, cur / math.sqrt(a))
    field.check_edges(f"hermite-gauss order {order}")
    return field


def superpose(fields: Sequence[Field1D], coeffs: Sequence[complex]) -> Field1D:
    """Pointwise ``sum coeff_i E_i`` with no renormalization."""
    if len(fields) != len(coeffs):
        raise LengthMismatch(f"{len(fields)} fields but {len(coeffs)} coefficients")
    if not fields:
        raise LengthMismatch("superpose needs at least one field")
    grid = fields[0].grid
    total = np.zeros(grid.n, dtype=complex)
    for f, c in zip(fields, coeffs):
        if f.grid != grid:
            raise GridMismatch("superposed fields must share one grid")
        total = total + complex(c) * f.samples
    return Field1D(grid, total)


def make_partially_coherent_pair(u1: Field1D, u2: Field1D, mu: float) -> Ensemble:
    """Two-mode ensemble whose cross coherence between ``u1`` and ``u2`` is ``mu``.

    Modes (u1 + u2)/sqrt(2) and (u1 - u2)/sqrt(2) carry weights (1 + mu)/2 and
    (1 - mu)/2, which gives
    ``Gamma = (u1* u1 + u2* u2)/2 + mu (u1* u2 + u2* u1)/2``.
    """
    if not abs(mu) <= 1:
        raise InvalidParam(f"degree of coherence must satisfy |mu| <= 1, got {mu}")
    if u1.grid != u2.grid:
        raise GridMismatch("u1 and u2 must share one grid")
    for name, u in (("u1", u1), ("u2", u2)):
        if abs(u.power - 1.0) > 1e-6:
            raise InvalidParam(f"{name} must have unit power, got {u.power:.6g}")
    r = 1 / math.sqrt(2)
    plus = superpose([u1, u2], [r, r])
    minus = superpose([u1, u2], [r, -r])
    return Ensemble((((1 + mu) / 2, plus), ((1 - mu) / 2, minus)))


def wedge_beam(
    grid: Grid1D,
    k1: float = 3.0,
    k2: float = -3.0,
    a: float = 1.0,
    c: float = 0.0,
    eps3: float = 0.0,
    k3: float | None = None,
) -> Ensemble:
    """Front- and back-surface reflections off a glass wedge.

    Coherent sum ``(g(k1) + g(k2))/sqrt(2) + eps3 g(k3)`` of equal Gaussians;
    the weak third beam defaults to ``k3 = 2 k2 - k1``, which puts its cross
    term with the first beam on top of the second lobe.
    """
    if not eps3 >= 0:
        raise InvalidParam(f"eps3 must be >= 0, got {eps3}")
    if k3 is None:
        k3 = 2 * k2 - k1
    r = 1 / math.sqrt(2)
    fields = [make_gaussian(grid, 0.0, a, k1, c), make_gaussian(grid, 0.0, a, k2, c)]
    coeffs = [r, r]
    if eps3 > 0:
        fields.append(make_gaussian(grid, 0.0, a, k3, c))
        coeffs.append(eps3)
    return Ensemble.pure(superpose(fields, coeffs))


def spatial_frequencies(grid: Grid1D) -> np.ndarray:
    """Angular frequencies matching ``np.fft.fft`` ordering."""
    return 2 * np.pi * np.fft.fftfreq(grid.n, grid.dx)


def propagate_fresnel(field: Field1D, z: float, k0: float) -> Field1D:
    """Paraxial free-space propagation by ``z`` with carrier wavenumber ``k0``.

    Spectral method on the periodic grid: each plane-wave component picks up
    ``exp(+i z k^2 / (2 k0))``, the paraxial phase in this package's sign
    convention, so a propagated beam diverges (positive x-k correlation) and
    its Wigner function shears as ``W_z(x, k) = W_0(x - z k / k0, k)``.
    """
    if not k0 > 0:
        raise InvalidParam(f"k0 must be > 0, got {k0}")
    if z == 0:
        return field
    kk = spatial_frequencies(field.grid)
    spec = np.fft.fft(field.samples)
    out = np.fft.ifft(spec * np.exp(1j * z * kk**2 / (2 * k0)))
    return Field1D(field.grid, out)


def total_power(ensemble) -> float:
    ens = as_ensemble(ensemble)
    return float(sum(w * f.power for w, f in ens.modes))


@dataclass(frozen=True)
class BeamUnits:
    """Physical scale for reporting: reference waist in mm, wavelength in nm."""

    w0_mm: float = 1.0
    wavelength_nm: float = 632.8

    def length_mm(self, x):
        return np.asarray(x) * self.w0_mm

    def angle_mrad(self, k):
        """Propagation angle for a transverse frequency ``k`` (in 1/w0)."""
        k_phys = np.asarray(k) / (self.w0_mm * 1e-3)  # 1/m
        k0 = 2 * np.pi / (self.wavelength_nm * 1e-9)
        return 1e3 * k_phys / k0

    def k0(self) -> float:
        """Carrier wavenumber in beam units (1/w0)."""
        return 2 * np.pi * self.w0_mm * 1e-3 / (self.wavelength_nm * 1e-9)
