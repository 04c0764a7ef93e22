"""Two-beam Wigner model, least-squares coherence fit and fringe diagnostics.

Closed form for two Gaussians of common width ``a`` and chirp ``c``,
``g_i(u) = (pi a^2)^(-1/4) exp(-(u-x_i)^2/(2a^2) - i k_i (u-x_i) + i c (u-x_i)^2)``.
With ``G(u, v) = exp(-u^2/a^2 - a^2 v^2)/pi`` the kernel ``exp(2 i k xi)``
gives

    W_ii(x, k) = G(x - x_i, k - k_i + 2c (x - x_i))
    W_12(x, k) = G(X, K) exp(i [(k1 - k2) X - (x1 - x2) k])

where ``X = x - x_m``, ``K = k - k_m + 2c X`` and ``(x_m, k_m)`` is the
midpoint of the two lobes. A pair with powers ``amp1``, ``amp2`` and degree
of coherence ``mu`` therefore has

    W = amp1 W_11 + amp2 W_22
        + 2 mu sqrt(amp1 amp2) G(X, K) cos((k1 - k2) X - (x1 - x2)(k - k_m) + psi)

with every constant phase (including ``-k_m (x1 - x2)``) folded into ``psi``.
"""
from __future__ import annotations

import math
from dataclasses import astuple, dataclass, replace

import numpy as np

from .errors import BadInit, InvalidParam, NoConvergence, NoPeak
from .wigner import WignerMap

PARAM_NAMES = ("amp1", "amp2", "x1", "x2", "k1", "k2", "a", "c", "mu", "psi", "offset")


@dataclass(frozen=True)
class TwoBeamModel:
    amp1: float = 0.5
    amp2: float = 0.5
    x1: float = 0.0
    x2: float = 0.0
    k1: float = 3.0
    k2: float = -3.0
    a: float = 1.0
    c: float = 0.0
    mu: float = 1.0
    psi: float = 0.0
    offset: float = 0.0

    def validate(self, physical: bool = True) -> None:
        if not self.a > 0:
            raise InvalidParam(f"width a must be > 0, got {self.a}")
        if physical:
            if self.amp1 < 0 or self.amp2 < 0:
                raise InvalidParam("lobe amplitudes must be >= 0")
            if abs(self.mu) > 1:
                raise InvalidParam(f"|mu| must be <= 1, got {self.mu}")

    def vector(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    @classmethod
    def from_vector(cls, v) -> TwoBeamModel:
        return cls(*(float(t) for t in v))


def _gauss(u, v, a):
    return np.exp(-(u**2) / a**2 - a**2 * v**2) / math.pi


def _evaluate(p: TwoBeamModel, x, k):
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float)
    u1, u2 = x - p.x1, x - p.x2
    lobes = p.amp1 * _gauss(u1, k - p.k1 + 2 * p.c * u1, p.a)
    lobes = lobes + p.amp2 * _gauss(u2, k - p.k2 + 2 * p.c * u2, p.a)
    xm, km = 0.5 * (p.x1 + p.x2), 0.5 * (p.k1 + p.k2)
    big_x = x - xm
    env = _gauss(big_x, k - km + 2 * p.c * big_x, p.a)
    arg = (p.k1 - p.k2) * big_x - (p.x1 - p.x2) * (k - km) + p.psi
    amp = 2 * p.mu * math.sqrt(max(p.amp1, 0.0) * max(p.amp2, 0.0))
    return lobes + amp * env * np.cos(arg) + p.offset


def model_wigner(model: TwoBeamModel, x, k):
    """Closed-form Wigner function of a partially coherent Gaussian pair."""
    model.validate(physical=True)
    return _evaluate(model, x, k)


def model_map(model: TwoBeamModel, x_axis, k_axis) -> np.ndarray:
    xx, kk = np.meshgrid(np.asarray(x_axis, float), np.asarray(k_axis, float), indexing="ij")
    return model_wigner(model, xx, kk)


def _local_maxima(y: np.ndarray) -> list[int]:
    idx = [j for j in range(1, y.size - 1) if y[j] > y[j - 1] and y[j] >= y[j + 1]]
    return sorted(idx, key=lambda j: y[j], reverse=True)


def initial_model(wmap: WignerMap) -> TwoBeamModel:
    """Starting point for ``fit_two_beam`` read off the map.

    Lobe frequencies are the two largest local maxima of the x-integrated
    map (the cross term averages out along x); lobe positions, widths and
    powers come from the map rows through those frequencies, and the cross
    term's amplitude and phase from projecting the midpoint row on the
    expected fringe.
    """
    x, k, v = wmap.x_axis, wmap.k_axis, wmap.values
    if x.size < 3 or k.size < 3:
        raise BadInit("map is too small to locate two lobes")
    prof = np.trapezoid(v, x, axis=0)
    peaks = [j for j in _local_maxima(prof) if prof[j] > 0.05 * prof.max()]
    if prof.max() <= 0 or len(peaks) < 2:
        raise BadInit("map does not show two lobes")
    j1, j2 = sorted(peaks[:2], key=lambda j: -k[j])
    lobes = []
    for j in (j1, j2):
        row = np.clip(v[:, j], 0.0, None)
        norm = np.trapezoid(row, x)
        xc = np.trapezoid(row * x, x) / norm
        var = np.trapezoid(row * (x - xc) ** 2, x) / norm
        lobes.append((float(k[j]), float(xc), float(row.max() * math.pi), math.sqrt(max(2 * var, 1e-12))))
    (k1, x1, amp1, a1), (k2, x2, amp2, a2) = lobes
    guess = TwoBeamModel(amp1, amp2, x1, x2, k1, k2, 0.5 * (a1 + a2), 0.0, 0.0, 0.0, 0.0)
    jm = int(np.argmin(np.abs(k - 0.5 * (k1 + k2))))
    resid = v[:, jm] - _evaluate(guess, x, np.full_like(x, k[jm]))
    xm = 0.5 * (x1 + x2)
    env = _gauss(x - xm, k[jm] - 0.5 * (k1 + k2), guess.a)
    proj = np.sum(resid * env * np.exp(-1j * (k1 - k2) * (x - xm)))
    scale = math.sqrt(amp1 * amp2) * np.sum(env**2)
    mu0 = abs(proj) / scale if scale > 0 else 0.0
    return replace(guess, mu=float(min(mu0, 1.0)), psi=float(np.angle(proj)))


@dataclass(frozen=True)
class FitResult:
    best: TwoBeamModel
    stderr: dict
    rms_residual: float
    iterations: int
    cost: float

    @property
    def unphysical(self) -> bool:
        return abs(self.best.mu) > 1

    def report(self) -> str:
        lines = []
        for name in PARAM_NAMES:
            lines.append(f"{name} = {getattr(self.best, name):.9g}")
            lines.append(f"{name}_stderr = {self.stderr[name]:.3g}")
        lines.append(f"rms_residual = {self.rms_residual:.6g}")
        lines.append(f"iterations = {self.iterations}")
        if self.unphysical:
            lines.append("mu_flag = unphysical, within error")
        return "\n".join(lines) + "\n"


def _jacobian(fun, p, r0):
    jac = np.empty((r0.size, p.size))
    for j in range(p.size):
        h = 1e-6 * max(1.0, abs(p[j]))
        up, dn = p.copy(), p.copy()
        up[j] += h
        dn[j] -= h
        jac[:, j] = (fun(up) - fun(dn)) / (2 * h)
    return jac


def _pairwise_cost(r):
    # numpy's sum uses pairwise summation, so the cost is order-stable
    return float(np.sum(r * r))


def fit_two_beam(
    wmap: WignerMap,
    init: TwoBeamModel | None = None,
    max_iter: int = 500,
    rtol: float = 1e-10,
) -> FitResult:
    """Damped Gauss-Newton (Levenberg-Marquardt) fit of the two-beam model.

    Minimizes the sum of squared residuals over all map points. Steps that
    raise the cost are rejected and the damping increased; the fit stops when
    an accepted step changes the cost by less than ``rtol`` relative, or the
    cost reaches round-off. Standard errors are the square roots of the
    diagonal of ``s^2 (J^T J)^-1`` with ``s^2`` the residual variance.
    """
    if init is None:
        init = initial_model(wmap)
    init.validate(physical=False)
    xx, kk = np.meshgrid(wmap.x_axis, wmap.k_axis, indexing="ij")
    xx, kk = xx.ravel(), kk.ravel()
    data = wmap.values.ravel()

    def resid(vec):
        p = TwoBeamModel.from_vector(vec)
        if not p.a > 0:
            return np.full(data.size, np.inf)
        return _evaluate(p, xx, kk) - data

    p = init.vector()
    r = resid(p)
    cost = _pairwise_cost(r)
    zero_cost = _pairwise_cost(data)
    if not cost <= 10 * zero_cost:
        raise BadInit(f"initial cost {cost:.3g} exceeds 10x the zero-model cost {zero_cost:.3g}")
    floor = 1e-28 * max(zero_cost, 1e-300)
    lam = 1e-3
    it = 0
    converged = cost <= floor
    jac = _jacobian(resid, p, r)
    while not converged and it < max_iter:
        it += 1
        jtj = jac.T @ jac
        grad = jac.T @ r
        diag = np.diag(jtj).copy()
        diag = np.maximum(diag, 1e-12 * max(diag.max(), 1e-300))
        accepted = False
        while lam < 1e16:
            try:
                step = np.linalg.solve(jtj + lam * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(jtj + lam * np.diag(diag), -grad, rcond=None)[0]
            trial = p + step
            r_trial = resid(trial)
            c_trial = _pairwise_cost(r_trial)
            if np.isfinite(c_trial) and c_trial < cost:
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            # no descent direction left at working precision
            converged = True
            break
        change = cost - c_trial
        p, r, cost_prev, cost = trial, r_trial, cost, c_trial
        lam = max(lam * 0.3, 1e-12)
        if change <= rtol * cost_prev or cost <= floor or np.max(np.abs(step)) <= 1e-15 * (1 + np.max(np.abs(p))):
            converged = True
        jac = _jacobian(resid, p, r)
    best = TwoBeamModel.from_vector(p)
    if not converged:
        raise NoConvergence(f"no convergence after {max_iter} iterations", best=best)
    dof = max(data.size - p.size, 1)
    s2 = cost / dof
    cov = s2 * np.linalg.pinv(jac.T @ jac)
    err = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    stderr = {name: float(e) for name, e in zip(PARAM_NAMES, err)}
    rms = math.sqrt(cost / data.size)
    return FitResult(best, stderr, rms, it, cost)


def parse_fit_report(text: str) -> dict:
    out = {}
    for line in text.splitlines():
        if "=" not in line:
            continue
        key, value = (t.strip() for t in line.split("=", 1))
        try:
            out[key] = float(value)
        except ValueError:
            out[key] = value
    return out


def fringe_resolution(wmap: WignerMap) -> float:
    """Native spectral bin of an x slice, ``2 pi / (N dx)``."""
    x = wmap.x_axis
    return 2 * math.pi / (x.size * (x[1] - x[0]))


def fringe_frequency(wmap: WignerMap, k_slice: float) -> float:
    """Dominant nonzero spatial (angular) frequency along x of the slice at ``k_slice``.

    The slice is zero-padded, the low-frequency envelope lobe is skipped up
    to the first spectral minimum, and the peak is refined by a 3-point
    parabola.
    """
    x, k = wmap.x_axis, wmap.k_axis
    j = int(np.argmin(np.abs(k - k_slice)))
    dk = np.min(np.diff(k)) if k.size > 1 else math.inf
    if abs(k[j] - k_slice) > 0.5 * dk + 1e-12:
        raise InvalidParam(f"no map row near k = {k_slice}")
    steps = np.diff(x)
    if x.size < 8 or np.ptp(steps) > 1e-9 * steps.mean():
        raise InvalidParam("fringe analysis needs a uniform x axis with at least 8 samples")
    y = wmap.values[:, j]
    dx = steps.mean()
    npad = 16 * (1 << int(math.ceil(math.log2(x.size))))
    spec = np.abs(np.fft.rfft(y, npad))
    freqs = 2 * math.pi * np.fft.rfftfreq(npad, dx)
    m0 = 0
    while m0 + 1 < spec.size and spec[m0 + 1] <= spec[m0]:
        m0 += 1
    tail = spec[m0:]
    if tail.size < 3:
        raise NoPeak("slice spectrum has no structure beyond the envelope")
    jp = m0 + int(np.argmax(tail))
    peak = spec[jp]
    if peak < 3 * np.median(tail) or peak < 1e-8 * spec.max() or jp in (m0, spec.size - 1):
        raise NoPeak(f"no fringe peak in the slice at k = {k[j]:g}")
    y0, y1, y2 = spec[jp - 1], spec[jp], spec[jp + 1]
    denom = y0 - 2 * y1 + y2
    shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
    return float(freqs[jp] + shift * (freqs[1] - freqs[0]))
