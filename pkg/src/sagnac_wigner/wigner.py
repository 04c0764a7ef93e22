"""Direct-sum Wigner oracle, phase-space diagnostics and the diffraction remap.

In one transverse dimension

    W(x, k) = (1/pi) sum_i w_i Re  int dxi exp(2 i k xi) E_i*(x - xi) E_i(x + xi)

evaluated as a Riemann sum over grid offsets with zero extension outside the
grid. ``x`` must sit on a grid point or half-way between two, so that both
``x - xi`` and ``x + xi`` are samples; ``k`` is arbitrary. With this
normalization a unit-power beam integrates to one over phase space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMap, OffGrid, RemapOutOfRange, UnderSampled
from .field import Ensemble, Grid1D, as_ensemble, total_power

SUPPORT_FRACTION = 1e-12


@dataclass(frozen=True, eq=False)
class WignerMap:
    x_axis: np.ndarray
    k_axis: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.array(self.x_axis, dtype=float)
        k = np.array(self.k_axis, dtype=float)
        v = np.array(self.values, dtype=float)
        if x.ndim != 1 or k.ndim != 1 or v.shape != (x.size, k.size):
            raise ValueError(f"values shape {v.shape} does not match axes ({x.size}, {k.size})")
        if x.size > 1 and np.any(np.diff(x) <= 0) or k.size > 1 and np.any(np.diff(k) <= 0):
            raise ValueError("map axes must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("map values must be finite")
        for arr in (x, k, v):
            arr.setflags(write=False)
        object.__setattr__(self, "x_axis", x)
        object.__setattr__(self, "k_axis", k)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "meta", dict(self.meta))

    def with_values(self, values, **meta) -> WignerMap:
        return WignerMap(self.x_axis, self.k_axis, values, {**self.meta, **meta})

    def row(self, k: float, tol: float = 1e-9) -> np.ndarray:
        """Slice at fixed ``k`` (a function of x)."""
        j = int(np.argmin(np.abs(self.k_axis - k)))
        if abs(self.k_axis[j] - k) > tol * max(1.0, abs(k)):
            raise KeyError(f"k = {k} is not on the map's k axis")
        return self.values[:, j]


def _pairs(grid: Grid1D, x: float):
    """Index pairs (a, b) with a + b = 2 (x - x_0)/dx, and their offsets xi."""
    p = grid.half_index(x)
    if p is None:
        raise OffGrid(f"x = {x} is not on the half-sample lattice of the grid (dx = {grid.dx})")
    lo = max(0, p - (grid.n - 1))
    hi = min(grid.n - 1, p)
    b = np.arange(lo, hi + 1)
    a = p - b
    xi = (b - a) * (0.5 * grid.dx)
    return a, b, xi


def _pair_products(ens: Ensemble, x: float):
    """Ensemble-averaged ``E*(x - xi) E(x + xi)`` and the offsets ``xi``."""
    a, b, xi = _pairs(ens.grid, x)
    e = ens.stack
    f = ens.weights @ (e[:, a].conj() * e[:, b])
    return xi, f


def _kernel_sum(xi: np.ndarray, f: np.ndarray, k: np.ndarray, dx: float) -> np.ndarray:
    """Complex ``(1/pi) sum exp(2 i k xi) f dx`` for each k."""
    if xi.size == 0:
        return np.zeros(np.shape(k), dtype=complex)
    phase = np.exp(2j * np.outer(np.atleast_1d(k), xi))
    return (phase @ f) * (dx / math.pi)


def wigner_point(ensemble, x: float, k: float) -> float:
    """Wigner value at one phase-space point by direct summation."""
    ens = as_ensemble(ensemble)
    xi, f = _pair_products(ens, x)
    return float(_kernel_sum(xi, f, np.array([k]), ens.grid.dx)[0].real)


def sampling_bounds(ensemble) -> dict:
    """Largest axis steps that resolve the map's oscillations.

    W oscillates along k at most as fast as the spatial diameter D of the
    beam and along x as fast as its spectral diameter K, so the Nyquist-type
    bounds are ``dk <= pi/D`` and ``dx <= pi/K``. Support is where the
    intensity (resp. power spectrum) exceeds 1e-12 of its peak.
    """
    ens = as_ensemble(ensemble)
    g = ens.grid
    w = ens.weights

    def diameter(profile, coords):
        if profile.max() <= 0:
            return 0.0
        sel = coords[profile > SUPPORT_FRACTION * profile.max()]
        return float(sel.max() - sel.min())

    inten = w @ np.abs(ens.stack) ** 2
    spec = w @ np.abs(np.fft.fft(ens.stack, axis=1)) ** 2
    kk = 2 * np.pi * np.fft.fftfreq(g.n, g.dx)
    d_x = max(diameter(inten, g.x), g.dx)
    d_k = max(diameter(spec, kk), 2 * np.pi / (g.n * g.dx))
    return {"k_step_max": math.pi / d_x, "x_step_max": math.pi / d_k}


def natural_k_axis(grid: Grid1D) -> np.ndarray:
    """``n`` points with spacing pi/(n dx) covering [-pi/(2 dx), pi/(2 dx))."""
    dk = math.pi / (grid.n * grid.dx)
    return (np.arange(grid.n) - grid.n // 2) * dk


def wigner_map(ensemble, x_axis, k_axis, method: str = "oracle") -> WignerMap:
    """Wigner function on a rectangular grid; rows are x, columns are k."""
    ens = as_ensemble(ensemble)
    x_axis = np.asarray(x_axis, dtype=float)
    k_axis = np.asarray(k_axis, dtype=float)
    values = np.empty((x_axis.size, k_axis.size))
    imag = 0.0
    for m, x in enumerate(x_axis):
        xi, f = _pair_products(ens, x)
        row = _kernel_sum(xi, f, k_axis, ens.grid.dx)
        values[m] = row.real
        if row.size:
            imag = max(imag, float(np.max(np.abs(row.imag))))
    meta = {
        "method": method,
        "source": ens.digest(),
        "total_power": total_power(ens),
        "imag_residue": imag,
        **sampling_bounds(ens),
    }
    return WignerMap(x_axis, k_axis, values, meta)


def _trapz(y, x, axis):
    if x.size < 2:
        raise UnderSampled("need at least two samples along the integration axis")
    return np.trapezoid(y, x, axis=axis)


def _check_step(axis: np.ndarray, bound, name: str):
    if bound is None or axis.size < 2:
        return
    step = float(np.max(np.diff(axis)))
    if step > bound * (1 + 1e-9):
        raise UnderSampled(f"{name} spacing {step:.4g} exceeds sampling bound {bound:.4g}")


def marginal_x(wmap: WignerMap) -> np.ndarray:
    """Intensity profile ``<|E(x)|^2> = int W dk`` (trapezoidal in k)."""
    _check_step(wmap.k_axis, wmap.meta.get("k_step_max"), "k axis")
    return _trapz(wmap.values, wmap.k_axis, axis=1)


def marginal_k(wmap: WignerMap) -> np.ndarray:
    """Power spectrum ``|(2 pi)^(-1/2) int E(x) exp(+i k x) dx|^2 = int W dx``."""
    _check_step(wmap.x_axis, wmap.meta.get("x_step_max"), "x axis")
    return _trapz(wmap.values, wmap.x_axis, axis=0)


@dataclass(frozen=True)
class Moments:
    mean_x: float
    mean_k: float
    var_x: float
    var_k: float
    cov_xk: float
    tilt_angle: float


def covariance_moments(wmap: WignerMap) -> Moments:
    x, k, v = wmap.x_axis, wmap.k_axis, wmap.values

    def integrate(f):
        return float(_trapz(_trapz(f, k, axis=1), x, axis=0))

    total = integrate(v)
    scale = integrate(np.abs(v))
    if not total > 1e-9 * max(scale, 1e-300):
        raise DegenerateMap(f"map integrates to {total:.3g}; moments are undefined")
    xx = x[:, None]
    kk = k[None, :]
    mx = integrate(v * xx) / total
    mk = integrate(v * kk) / total
    vx = integrate(v * (xx - mx) ** 2) / total
    vk = integrate(v * (kk - mk) ** 2) / total
    cxk = integrate(v * (xx - mx) * (kk - mk)) / total
    # an isotropic distribution has no principal axis; report zero tilt
    if math.hypot(2 * cxk, vx - vk) <= 1e-6 * (abs(vx) + abs(vk)):
        tilt = 0.0
    else:
        tilt = 0.5 * math.atan2(2 * cxk, vx - vk)
    return Moments(mx, mk, vx, vk, cxk, tilt)


def shear_compensate(wmap: WignerMap, z: float, k0: float) -> WignerMap:
    """Undo free propagation by ``z``: ``W'(x, k) = W(x + (z/k0) k, k)``.

    Linear interpolation along x; samples that land outside the map are
    taken as zero. ``shear_compensate(m, -z, k0)`` is the inverse remap.
    """
    if not k0 > 0:
        raise RemapOutOfRange(f"k0 must be > 0, got {k0}")
    x, k = wmap.x_axis, wmap.k_axis
    if z == 0:
        return wmap.with_values(wmap.values)
    shift = (z / k0) * k
    half_span = 0.5 * (x[-1] - x[0])
    if np.max(np.abs(shift)) >= half_span:
        raise RemapOutOfRange(
            f"shear of {np.max(np.abs(shift)):.3g} exceeds half the x span ({half_span:.3g})"
        )
    out = np.empty_like(wmap.values)
    for j in range(k.size):
        out[:, j] = np.interp(x + shift[j], x, wmap.values[:, j], left=0.0, right=0.0)
    history = list(wmap.meta.get("shear", [])) + [[float(z), float(k0)]]
    return wmap.with_values(out, shear=history)
