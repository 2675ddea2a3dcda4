"""Partial F.B.I. transforms for tube structures, their inversion, and decay classification.

Kernels (w = z - Z(x', t)):

    adapted:  exp(i zeta.w - <zeta> <w>^2) Delta(w, zeta),   Delta = 1 + i (w.zeta)/<zeta>
    kappa:    exp(i xi.w  - |xi|^k <w>^2) Delta_k(w, xi),    Delta_k = 1 + i k |xi|^(k-2) (xi.w)

with <w>^2 = w.w (no conjugation).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .quadrature import Cutoff, uniform_breaks
from .solutions import GridSolution, Solution
from .tube import TubeStructure


# -- algebraic pieces ----------------------------------------------------------

def bracket(zeta) -> complex:
    """Principal square root of zeta.zeta; refuses the branch cut (-inf, 0]."""
    zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
    sq = complex(np.sum(zeta * zeta))
    if sq.imag == 0.0 and sq.real <= 0.0:
        raise ValueError(f"bracket undefined: zeta.zeta = {sq} lies on the branch cut")
    return complex(np.sqrt(sq))


def delta_general(z, zeta) -> complex:
    """Jacobian determinant of zeta -> zeta + i z <zeta>."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
    return complex(1.0 + 1j * np.sum(z * zeta) / bracket(zeta))


def delta_kappa(z, xi, kappa: float) -> complex:
    """Jacobian determinant of xi -> xi + i z |xi|^kappa."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    r = float(np.linalg.norm(xi))
    if r == 0.0:
        raise ValueError("delta_kappa needs xi != 0")
    return complex(1.0 + 1j * kappa * r ** (kappa - 2.0) * np.sum(xi * z))


def _check_kappa(kappa: float) -> None:
    if not 0.0 < kappa <= 1.0:
        raise ValueError(f"kappa must lie in (0, 1], got {kappa}")


# -- requests ----------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    rule: str = "gauss-legendre"  # or "trapezoid"
    nodes: int = 16  # per panel (Gauss-Legendre) or minimum per axis (trapezoid)
    window: float = 40.0  # x' integral truncated where the Gaussian drops below e^-window
    max_panels: int = 4096

    def __post_init__(self):
        if self.rule not in ("gauss-legendre", "trapezoid"):
            raise ValueError(f"unknown quadrature rule {self.rule!r}")
        if self.nodes < 8:
            raise ValueError("quadrature needs at least 8 nodes")
        if self.window <= 0:
            raise ValueError("truncation window must be positive")


@dataclass
class FbiRequest:
    u: Solution
    chi: Cutoff
    kappa: float
    points: list[tuple[np.ndarray, np.ndarray, np.ndarray]]  # (t, x, xi)
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)

    def validate(self, ts: TubeStructure) -> None:
        _check_kappa(self.kappa)
        if self.chi.outer > ts.V.inradius + 1e-12:
            raise ValueError(f"cutoff support radius {self.chi.outer} exceeds V half-width {ts.V.inradius}")
        for t, x, xi in self.points:
            if not np.any(np.asarray(xi)):
                raise ValueError("xi must be nonzero")


@dataclass
class FbiResult:
    values: np.ndarray
    underresolved: np.ndarray  # per point
    notes: list[str] = field(default_factory=list)


def _window(center: np.ndarray, radius: float, outer: float) -> list[tuple[float, float]] | None:
    out = []
    for c in center:
        lo, hi = max(-outer, c - radius), min(outer, c + radius)
        if hi <= lo:
            return None
        out.append((lo, hi))
    return out


def _breaks(bounds, xi_abs: float, gauss_width: float, quad: QuadratureSpec) -> list[np.ndarray]:
    out = []
    for lo, hi in bounds:
        width = hi - lo
        panels = max(4, math.ceil(width * (xi_abs / math.pi + 2.0 / gauss_width)))
        out.append(uniform_breaks(lo, hi, min(panels, quad.max_panels)))
    return out


def fbi_kappa_at(ts: TubeStructure, u: Solution, t, x, xi, kappa: float, chi: Cutoff,
                 quad: QuadratureSpec | None = None, z=None) -> tuple[complex, bool]:
    """One value of the kappa-transform at (t; z, xi); z defaults to Z(x, t).

    Returns (value, underresolved).
    """
    quad = quad or QuadratureSpec()
    _check_kappa(kappa)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    r = float(np.linalg.norm(xi))
    if r == 0.0:
        raise ValueError("xi must be nonzero")
    phit = ts.phi.eval(t)
    if z is None:
        z = np.atleast_1d(np.asarray(x, dtype=float)) + 1j * phit
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    a = r ** kappa
    gauss_width = a ** -0.5
    bounds = _window(z.real, math.sqrt(quad.window / a), chi.outer)
    if bounds is None:
        return 0j, False
    breaks = _breaks(bounds, r, gauss_width, quad)
    imw = z.imag - phit  # Im of z - Z(x', t), independent of x'

    def kernel(xp):
        w = z[None, :].real - xp + 1j * imw[None, :]
        ww = np.sum(w * w, axis=-1)
        phase = 1j * (w @ xi) - a * ww
        return np.exp(phase) * (1.0 + 1j * kappa * r ** (kappa - 2.0) * (w @ xi)) * chi(xp)

    under = False
    if isinstance(u, GridSolution):
        h = u.spacing
        under = gauss_width < 4 * h or h * r > math.pi
    return u.pair(ts, t, kernel, breaks, quad.nodes, rule=quad.rule), under


def fbi_kappa(ts: TubeStructure, req: FbiRequest) -> FbiResult:
    req.validate(ts)
    vals = np.empty(len(req.points), dtype=complex)
    under = np.zeros(len(req.points), dtype=bool)
    for i, (t, x, xi) in enumerate(req.points):
        vals[i], under[i] = fbi_kappa_at(ts, req.u, t, x, xi, req.kappa, req.chi, req.quad)
    notes = []
    if under.any():
        msg = f"{int(under.sum())} of {len(under)} evaluations under-resolved by the sample grid"
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)
    return FbiResult(vals, under, notes)


def fbi_adapted(ts: TubeStructure, u: Solution, t, z, zeta, chi: Cutoff,
                quad: QuadratureSpec | None = None) -> complex:
    """Adapted transform with complex frequency zeta in {|Im zeta| < |Re zeta|}."""
    quad = quad or QuadratureSpec()
    zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
    if not np.linalg.norm(zeta.imag) < np.linalg.norm(zeta.real):
        raise ValueError("zeta must satisfy |Im zeta| < |Re zeta|")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    phit = ts.phi.eval(t)
    b = bracket(zeta)
    a = b.real
    bounds = _window(z.real, math.sqrt(quad.window / a) * 1.5, chi.outer)
    if bounds is None:
        return 0j
    breaks = _breaks(bounds, float(np.linalg.norm(zeta)), a ** -0.5, quad)
    imw = z.imag - phit

    def kernel(xp):
        w = z[None, :].real - xp + 1j * imw[None, :]
        ww = np.sum(w * w, axis=-1)
        wz = w @ zeta
        return np.exp(1j * wz - b * ww) * (1.0 + 1j * wz / b) * chi(xp)

    return u.pair(ts, t, kernel, breaks, quad.nodes, rule=quad.rule)


# -- matrix form and inversion -------------------------------------------------------

def _lattice(p: np.ndarray) -> tuple[float, float] | None:
    """(origin, spacing) when ``p`` (N, 1) is a uniform increasing 1-D grid."""
    if p.ndim != 2 or p.shape[1] != 1 or len(p) < 2:
        return None
    d = np.diff(p[:, 0])
    if d[0] > 0 and np.allclose(d, d[0], rtol=1e-9, atol=0.0):
        return float(p[0, 0]), float(d[0])
    return None


def _offset(src: tuple[float, float], dst: tuple[float, float], n_dst: int) -> int | None:
    if not math.isclose(src[1], dst[1], rel_tol=1e-9):
        return None
    k = (dst[0] - src[0]) / src[1]
    ki = round(k)
    return ki if abs(k - ki) < 1e-6 else None


def _lattice_apply(kern, off: int, n_src: int, n_dst: int, h: float, data: np.ndarray) -> np.ndarray:
    """out[i, :] = sum_j kern((off + i - j) h)[:, ] * data[j, :] by FFT convolution."""
    from scipy.signal import fftconvolve

    s = np.arange(n_dst + n_src - 1)
    d = (s - (n_src - 1) + off) * h
    K = kern(d)  # (L, Nk)
    full = fftconvolve(K, data, mode="full", axes=0)
    return full[n_src - 1:n_src - 1 + n_dst]


def _kappa_kernel(xi: np.ndarray, kappa: float, jac: bool):
    """Kernel in the offset d = x - y for 1-D frequencies xi (Nk,)."""
    a = np.abs(xi) ** kappa
    c = kappa * np.abs(xi) ** (kappa - 2.0) * xi

    def kern(d):
        d = d[:, None]
        out = np.exp(1j * d * xi[None, :] - a[None, :] * d * d)
        if jac:
            out *= 1.0 + 1j * c[None, :] * d
        return out

    return kern


def fbi_kappa_matrix(y: np.ndarray, wy: np.ndarray, uy: np.ndarray, x: np.ndarray,
                     xi: np.ndarray, kappa: float, chi_y: np.ndarray | None = None,
                     chunk: int = 64) -> np.ndarray:
    """Transform on a real slice from quadrature samples: F[i, j] at (x_i, xi_j).

    ``y`` (Ny, m) nodes with weights ``wy`` and samples ``uy`` of u(., t);
    ``x`` (Nx, m) base points, ``xi`` (Nk, m) frequencies. Uniform 1-D grids with
    a common spacing use FFT convolution.
    """
    _check_kappa(kappa)
    f = wy * uy * (1.0 if chi_y is None else chi_y)
    r = np.linalg.norm(xi, axis=-1)
    if np.any(r == 0):
        raise ValueError("xi must be nonzero")
    ly, lx = _lattice(y), _lattice(x)
    if ly and lx and xi.shape[1] == 1:
        off = _offset(ly, lx, len(x))
        if off is not None:
            data = np.broadcast_to(f[:, None], (len(y), len(xi)))
            return _lattice_apply(_kappa_kernel(xi[:, 0], kappa, True), off, len(y), len(x), ly[1], data)
    out = np.empty((len(x), len(xi)), dtype=complex)
    d = x[:, None, :] - y[None, :, :]  # (Nx, Ny, m)
    dd = np.sum(d * d, axis=-1)
    for s in range(0, len(xi), chunk):
        k = xi[s:s + chunk]
        rk = r[s:s + chunk]
        dk = np.einsum("aym,km->ayk", d, k)
        kern = np.exp(1j * dk - (rk ** kappa)[None, None, :] * dd[..., None])
        kern *= 1.0 + 1j * kappa * (rk ** (kappa - 2.0))[None, None, :] * dk
        out[:, s:s + chunk] = np.einsum("ayk,y->ak", kern, f)
    return out


@dataclass
class InversionResult:
    values: np.ndarray  # extrapolated limit at the evaluation points
    iterates: np.ndarray  # (len(eps), N)
    eps: np.ndarray
    tail: float  # max |F| on the outermost frequency shell / max |F|
    richardson_change: float  # last correction size


def default_eps(xi_max: float, count: int = 5, ratio: float = 4.0) -> np.ndarray:
    eps0 = 1.0 / xi_max ** 2
    return eps0 * ratio ** -np.arange(count, dtype=float)


def _neville_at_zero(eps: np.ndarray, vals: np.ndarray) -> tuple[np.ndarray, float]:
    p = [v.copy() for v in vals]
    change = 0.0
    n = len(eps)
    for j in range(1, n):
        for i in range(n - j):
            new = (eps[i] * p[i + 1] - eps[i + j] * p[i]) / (eps[i] - eps[i + j])
            if i == n - j - 1:
                change = float(np.max(np.abs(new - p[i + 1]))) if new.size else 0.0
            p[i] = new
    return p[0], change


def invert_kappa(F: np.ndarray, xp: np.ndarray, wxp: np.ndarray, xi: np.ndarray, wxi: np.ndarray,
                 kappa: float, x_eval: np.ndarray, eps: Sequence[float] | None = None,
                 chunk: int = 64) -> InversionResult:
    """Reconstruct u(., t) from transform samples F[x'_i, xi_j] on one slice.

    u(x) = lim_{eps->0} (2 pi^3)^(-m/2) sum_ij w_i w_j exp(i xi.(x-x') - |xi|^k |x-x'|^2 - eps |xi|^2)
           F(x', xi) |xi|^(k m / 2)
    """
    _check_kappa(kappa)
    F = np.asarray(F, dtype=complex)
    if F.size == 0:
        raise ValueError("empty transform sample")
    if F.shape != (len(xp), len(xi)):
        raise ValueError(f"sample shape {F.shape} does not match grid ({len(xp)}, {len(xi)})")
    m = xp.shape[1]
    r = np.linalg.norm(xi, axis=-1)
    eps = default_eps(float(r.max())) if eps is None else np.asarray(eps, dtype=float)
    if eps.ndim != 1 or len(eps) < 1 or np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
        raise ValueError("eps sequence must be positive and strictly decreasing")
    pref = (2.0 * math.pi ** 3) ** (-m / 2.0)
    # G[a, j] = sum_i w_i exp(...) F[i, j]: independent of eps
    WF = wxp[:, None] * F
    G = None
    lp, le = _lattice(xp), _lattice(x_eval)
    if lp and le and m == 1:
        off = _offset(lp, le, len(x_eval))
        if off is not None:
            G = _lattice_apply(_kappa_kernel(xi[:, 0], kappa, False), off, len(xp), len(x_eval), lp[1], WF)
    if G is None:
        G = np.zeros((len(x_eval), len(xi)), dtype=complex)
        d = x_eval[:, None, :] - xp[None, :, :]
        dd = np.sum(d * d, axis=-1)
        for s in range(0, len(xi), chunk):
            k = xi[s:s + chunk]
            rk = r[s:s + chunk]
            kern = np.exp(1j * np.einsum("aym,km->ayk", d, k) - (rk ** kappa)[None, None, :] * dd[..., None])
            G[:, s:s + chunk] = np.einsum("ayk,yk->ak", kern, WF[:, s:s + chunk])
    G *= (wxi * r ** (kappa * m / 2.0))[None, :] * pref
    iterates = np.stack([G @ np.exp(-e * r ** 2) for e in eps])
    limit, change = _neville_at_zero(eps, iterates)
    absF = np.abs(F)
    shell = r >= r.max() * 0.95
    tail = float(absF[:, shell].max() / absF.max()) if absF.max() > 0 else 0.0
    return InversionResult(limit, iterates, eps, tail, change)


@dataclass
class RoundTrip:
    y: np.ndarray  # sample nodes of u on the slice (N, 1)
    u: np.ndarray
    xp: np.ndarray  # transform base points (padded lattice)
    xi: np.ndarray  # (Nk, 1)
    F: np.ndarray
    inversion: InversionResult
    x_eval: np.ndarray
    error: float  # sup |reconstruction - u| on x_eval


def frequency_grid(xi_max: float, dxi: float) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint grid on [-xi_max, xi_max]; it never contains xi = 0."""
    n = max(2, int(round(2 * xi_max / dxi)))
    step = 2 * xi_max / n
    return (-xi_max + step * (np.arange(n) + 0.5))[:, None], np.full(n, step)


def round_trip(y: np.ndarray, u: np.ndarray, chi_y: np.ndarray, kappa: float, xi_max: float = 60.0,
               dxi: float = 0.05, pad: float = 14.0, eval_radius: float | None = None) -> RoundTrip:
    """Transform samples of u on a uniform 1-D lattice and reconstruct them.

    The transform is tabulated on the lattice extended by ``pad`` on both
    sides: at low |xi| the Gaussian factor has width |xi|^(-kappa/2).
    """
    lat = _lattice(y)
    if lat is None:
        raise ValueError("round trip needs a uniform 1-D sample lattice")
    h = lat[1]
    k = int(round(pad / h))
    xp = (lat[0] + h * np.arange(-k, len(y) + k))[:, None]
    xi, wxi = frequency_grid(xi_max, dxi)
    wy = np.full(len(y), h)
    F = fbi_kappa_matrix(y, wy, u, xp, xi, kappa, chi_y)
    half = (y[-1, 0] - y[0, 0]) / 4 if eval_radius is None else eval_radius
    sel = np.abs(y[:, 0] - 0.5 * (y[0, 0] + y[-1, 0])) <= half + 1e-12
    inv = invert_kappa(F, xp, np.full(len(xp), h), xi, wxi, kappa, y[sel])
    err = float(np.max(np.abs(inv.values - u[sel]))) if sel.any() else 0.0
    return RoundTrip(y, u, xp, xi, F, inv, y[sel], err)


# -- well-positionedness -------------------------------------------------------------

@dataclass
class WellPositioned:
    kappa_wp: float
    kappa_prime: float
    violated: bool
    pairs: int


def well_positioned_probe(ts: TubeStructure, x_nodes: int = 9, t_nodes: int = 9, xi_dirs: int = 8,
                          cross_slice: bool = False) -> WellPositioned:
    """Empirical constants of the real-structure inequalities.

    With ``cross_slice=False`` the pairs share t, so z - z' is real and
    kappa' = 1 exactly. With ``cross_slice=True`` pairs range over (x,t),(x',t'),
    which exposes the |phi(t) - phi(t')| term.
    """
    if x_nodes < 2 or t_nodes < 1:
        raise ValueError("well-positionedness probe needs at least 2 x nodes and 1 t node")
    xs = ts.V.grid_points(x_nodes)
    tp = ts.W.grid_points(t_nodes)
    rng = np.random.default_rng(0)
    dirs = rng.normal(size=(xi_dirs, ts.m))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    zs = (xs[:, None, :] + 1j * ts.phi.eval(tp)[None, :, :]).reshape(-1, ts.m)
    tidx = np.repeat(np.arange(len(tp))[None, :], len(xs), axis=0).ravel()
    worst = math.inf
    count = 0
    for a in range(len(zs)):
        if cross_slice:
            others = np.arange(len(zs))
        else:
            others = np.nonzero(tidx == tidx[a])[0]
        w = zs[a][None, :] - zs[others]
        nw2 = np.sum(np.abs(w) ** 2, axis=-1)
        keep = nw2 > 1e-24
        w, nw2 = w[keep], nw2[keep]
        if not len(w):
            continue
        ww = np.sum(w * w, axis=-1)
        for d in dirs:
            val = np.real(1j * (w @ d) - ww)  # |xi| = 1; the ratio is scale-free
            worst = min(worst, float(np.min(-val / nw2)))
            count += len(w)
    if count == 0:
        raise ValueError("degenerate grid: no distinct point pairs")
    return WellPositioned(kappa_wp=0.0, kappa_prime=worst, violated=worst <= 0.0, pairs=count)


# -- decay classification ---------------------------------------------------------

S_GRID = np.round(np.arange(1.05, 8.0001, 0.05), 2)


@dataclass
class DecayFit:
    kind: str  # "ExponentialGevrey" | "Polynomial" | "NoDecay"
    residual: float
    xi_range: tuple[float, float]
    samples: int
    s: float | None = None
    epsilon: float | None = None
    C: float | None = None
    N: float | None = None
    C_N: float | None = None
    exp_residual: float | None = None
    poly_residual: float | None = None
    cone: dict | None = None
    floor_hits: int = 0
    all_zero: bool = False

    def to_json(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def _lsq(A: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    return coef, float(np.sqrt(np.mean(res ** 2)))


def fit_decay(xi_abs, magnitudes, s_grid: Sequence[float] = S_GRID, cone: dict | None = None,
              floor_rel: float = 1e-12) -> DecayFit:
    """Classify decay of |F| against |xi|.

    ``magnitudes`` may be 1-D (one ray) or 2-D (groups x len(xi_abs)); the
    worst case over groups is fitted.
    """
    xi_abs = np.asarray(xi_abs, dtype=float)
    mags = np.atleast_2d(np.asarray(magnitudes, dtype=float))
    if mags.shape[-1] != xi_abs.size:
        raise ValueError("magnitude samples do not match the |xi| grid")
    if xi_abs.size < 12:
        raise ValueError(f"fit needs at least 12 samples, got {xi_abs.size}")
    if xi_abs.min() <= 0 or xi_abs.max() / xi_abs.min() < 10.0 * (1 - 1e-9):
        raise ValueError("samples must span at least one decade of |xi|")
    if np.any(~np.isfinite(mags)) or np.any(mags < 0):
        raise ValueError("magnitudes must be finite and non-negative")
    env = mags.max(axis=0)
    rng = (float(xi_abs.min()), float(xi_abs.max()))
    if env.max() == 0.0:
        return DecayFit("Polynomial", 0.0, rng, int(xi_abs.size), N=math.inf, C_N=0.0, cone=cone, all_zero=True)
    ok = env > floor_rel * env.max()
    # beyond the first floor hit the data is rounding noise
    if not ok.all():
        first = int(np.argmin(ok))
        ok[first:] = False
    hits = int(np.sum(~ok))
    x, y = xi_abs[ok], np.log(env[ok])
    if x.size < 4:
        # collapsed to the noise floor almost immediately: faster than any fitted rate
        return DecayFit("ExponentialGevrey", 0.0, rng, int(xi_abs.size), s=float(s_grid[0]),
                        epsilon=math.inf, C=float(env.max()), cone=cone, floor_hits=hits)

    best = None
    for s in s_grid:
        A = np.stack([np.ones_like(x), -x ** (1.0 / s)], axis=1)
        coef, res = _lsq(A, y)
        if coef[1] > 0 and (best is None or res < best[2] - 1e-15):
            best = (float(s), coef, res)
    if best is not None:
        # continuous refinement between neighbouring grid values
        from scipy.optimize import minimize_scalar

        lo, hi = max(1.0001, best[0] - 0.05), best[0] + 0.05

        def f(s):
            A = np.stack([np.ones_like(x), -x ** (1.0 / s)], axis=1)
            return _lsq(A, y)[1]

        opt = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-4})
        s_ref = float(opt.x)
        A = np.stack([np.ones_like(x), -x ** (1.0 / s_ref)], axis=1)
        coef, res = _lsq(A, y)
        if coef[1] > 0 and res <= best[2]:
            best = (s_ref, coef, res)
    A = np.stack([np.ones_like(x), -np.log1p(x)], axis=1)
    pcoef, pres = _lsq(A, y)
    N = float(pcoef[1])
    eps_fit = best[1][1] if best is not None else 0.0
    common = dict(xi_range=rng, samples=int(xi_abs.size), cone=cone, floor_hits=hits,
                  exp_residual=None if best is None else best[2], poly_residual=pres)
    if N <= 0.5 and eps_fit <= 1e-9:
        return DecayFit("NoDecay", pres, N=N, C_N=float(np.exp(pcoef[0])), **common)
    scale = max(float(np.ptp(y)), 1.0)
    if best is not None and best[2] < pres and best[2] <= 0.05 * scale:
        s, coef, res = best
        return DecayFit("ExponentialGevrey", res, s=s, epsilon=float(coef[1]), C=float(np.exp(coef[0])), **common)
    if N <= 0.5:
        return DecayFit("NoDecay", pres, N=N, C_N=float(np.exp(pcoef[0])), **common)
    return DecayFit("Polynomial", pres, N=max(N, 0.0), C_N=float(np.exp(pcoef[0])), **common)


def verdict(fit: DecayFit, s: float | None = None, smooth_order: float = 8.0) -> str:
    """Map a decay fit to MicroSmooth | MicroGevrey(s) | Singular | Inconclusive."""
    if fit.all_zero:
        return "MicroSmooth"
    if fit.kind == "NoDecay":
        return "Singular"
    if fit.kind == "ExponentialGevrey":
        if s is not None and fit.s is not None and fit.s <= s + 1e-9:
            return f"MicroGevrey({s:g})"
        return "MicroSmooth"
    if fit.N is not None and fit.N >= smooth_order:
        return "MicroSmooth"
    return "Inconclusive"
