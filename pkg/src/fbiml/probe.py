"""End-to-end microlocal probe: certificate, kappa choice, decay sweep, verdict."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import curves, star
from .fbi import fbi_kappa_at, fbi_kappa_matrix, fit_decay, frequency_grid, invert_kappa, verdict, QuadratureSpec
from .quadrature import Cutoff
from .solutions import GridSolution, Solution
from .tube import TubeStructure


class QuadratureError(RuntimeError):
    """The requested sweep cannot be resolved by the available quadrature."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass
class ProbeSettings:
    s: float | None = None  # Gevrey index asked about; None asks only about smoothness
    kappa: float | None = None  # None: window midpoint when s and a certificate are known, else 1
    chi_inner: float = 0.5
    chi_outer: float = 0.9
    xi_min: float = 1.0
    xi_max: float = 200.0
    count: int = 24
    directions: int = 5
    half_angle: float = 0.25
    seed: int = 0
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)


@dataclass
class ProbeResult:
    kappa: float
    kappa_source: str
    certificate: dict
    fits: list[dict]
    combined: dict
    verdict: str
    rows: np.ndarray  # (K, m + 2): xi..., |xi|, |F|
    curves: dict | None
    point: tuple[list[float], list[float]]

    @property
    def cardinality(self) -> int:
        return int(self.rows.shape[0])


def choose_kappa(cert, s: float | None, kappa: float | None) -> tuple[float, str]:
    if kappa is not None:
        return float(kappa), "flag"
    if s is not None and isinstance(cert, star.StarCertificate):
        return curves.kappa_window(s, cert.theta).kappa, "window-midpoint"
    return 1.0, "default"


def curve_family(ts: TubeStructure, cert, xi0, half_angle: float, nodes: int = 5) -> dict | None:
    """Small Prop-style family check under a certificate."""
    if not isinstance(cert, star.StarCertificate):
        return None
    W0 = ts.W
    W1 = W0.scaled(0.5)
    dirs = star.Cone(np.asarray(xi0, dtype=float), half_angle).sample(3)
    starts = W1.grid_points(nodes)
    try:
        rep = curves.verify_prop_properties(ts.phi, dirs, starts, W0, W1, cert.theta, cert.C_L)
    except ValueError as exc:
        return {"error": str(exc)}
    return dict(rep.__dict__, passed=rep.passed)


def run_probe(ts: TubeStructure, u: Solution, xi0, settings: ProbeSettings | None = None,
              t=None, x=None, cert=None) -> ProbeResult:
    cfg = settings or ProbeSettings()
    xi0 = np.atleast_1d(np.asarray(xi0, dtype=float))
    if xi0.shape != (ts.m,):
        raise ValueError(f"xi0 must have {ts.m} entries")
    t = np.zeros(ts.n) if t is None else np.atleast_1d(np.asarray(t, dtype=float))
    x = np.zeros(ts.m) if x is None else np.atleast_1d(np.asarray(x, dtype=float))
    if cert is None:
        cert = star.certify(ts.phi, xi0, ts.W, cfg.half_angle, seed=cfg.seed)
    kappa, source = choose_kappa(cert, cfg.s, cfg.kappa)
    chi = Cutoff(cfg.chi_inner, cfg.chi_outer)
    cone = star.Cone(xi0, cfg.half_angle)
    dirs = cone.sample(cfg.directions, cfg.seed)
    radii = np.logspace(math.log10(cfg.xi_min), math.log10(cfg.xi_max), cfg.count)
    mags = np.zeros((len(dirs), len(radii)))
    rows = []
    under = []
    for a, d in enumerate(dirs):
        for b, r in enumerate(radii):
            val, bad = fbi_kappa_at(ts, u, t, x, r * d, kappa, chi, cfg.quad)
            if bad:
                under.append(float(r))
            if not np.isfinite(val):
                raise QuadratureError("non-finite transform value", {"xi": (r * d).tolist()})
            mags[a, b] = abs(val)
            rows.append([*(r * d).tolist(), r, abs(val)])
    if under:
        diag = {"underresolved": len(under), "first_xi_abs": min(under)}
        if isinstance(u, GridSolution):
            diag["grid_spacing"] = u.spacing
            diag["max_resolvable_xi"] = math.pi / u.spacing
        raise QuadratureError("grid samples cannot resolve the requested frequencies", diag)
    cone_info = cone.to_json()
    fits = []
    for a, d in enumerate(dirs):
        f = fit_decay(radii, mags[a], cone=cone_info)
        fits.append({"xi": d.tolist(), "fit": f.to_json(), "verdict": verdict(f, cfg.s)})
    combined = fit_decay(radii, mags, cone=cone_info)
    return ProbeResult(kappa, source, cert.to_json(), fits, combined.to_json(), verdict(combined, cfg.s),
                       np.array(rows), curve_family(ts, cert, xi0, cfg.half_angle), (t.tolist(), x.tolist()))


# -- full slice dumps for inversion ------------------------------------------------------

DUMP_KEYS = ("kappa", "t", "y", "u", "xp", "xi", "F")


def slice_dump(ts: TubeStructure, u: Solution, t, kappa: float, chi: Cutoff, nodes: int = 256,
               xi_max: float = 60.0, dxi: float = 0.05, pad: float = 14.0) -> dict:
    """Tabulate the transform of chi u on one slice (m = 1) for later inversion."""
    if ts.m != 1:
        raise ValueError("slice dumps are implemented for m = 1")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    hw = ts.V.half_widths[0]
    y = np.linspace(-hw, hw, nodes)[:, None]
    h = float(y[1, 0] - y[0, 0])
    if isinstance(u, GridSolution):
        ys, vals = u.slice(t)
        if ys.shape != y.shape or not np.allclose(ys, y):
            raise ValueError("grid samples must lie on the dump lattice")
    else:
        vals = u.values(ts, y, t)
    uy = np.asarray(vals, dtype=complex) * chi(y)
    k = int(round(pad / h))
    xp = (y[0, 0] + h * np.arange(-k, nodes + k))[:, None]
    xi, _ = frequency_grid(xi_max, dxi)
    F = fbi_kappa_matrix(y, np.full(nodes, h), uy, xp, xi, kappa)
    return {"kappa": np.array(kappa), "t": t, "y": y, "u": uy, "xp": xp, "xi": xi, "F": F}


@dataclass
class Reconstruction:
    x: np.ndarray
    values: np.ndarray
    reference: np.ndarray
    error: float
    tail: float
    richardson_change: float


def invert_dump(dump: dict, kappa: float | None = None, eval_radius: float | None = None) -> Reconstruction:
    missing = [k for k in DUMP_KEYS if k not in dump]
    if missing:
        raise ValueError(f"sample file lacks {', '.join(missing)}")
    F = np.asarray(dump["F"])
    if F.size == 0:
        raise ValueError("sample file holds no transform values")
    k_dump = float(np.asarray(dump["kappa"]))
    if kappa is not None and abs(kappa - k_dump) > 1e-12:
        raise ValueError(f"kappa mismatch: dump has {k_dump:g}, flag asks for {kappa:g}")
    y, xp, xi = (np.asarray(dump[k], dtype=float) for k in ("y", "xp", "xi"))
    u = np.asarray(dump["u"], dtype=complex)
    if F.shape != (len(xp), len(xi)) or len(u) != len(y):
        raise ValueError("grid mismatch between samples and axes")
    hx = float(xp[1, 0] - xp[0, 0])
    dxi = float(xi[1, 0] - xi[0, 0])
    lo, hi = y[0, 0], y[-1, 0]
    half = (hi - lo) / 4 if eval_radius is None else eval_radius
    sel = np.abs(y[:, 0] - 0.5 * (lo + hi)) <= half + 1e-12
    inv = invert_kappa(F, xp, np.full(len(xp), hx), xi, np.full(len(xi), dxi), k_dump, y[sel])
    err = float(np.max(np.abs(inv.values - u[sel]))) if sel.any() else 0.0
    return Reconstruction(y[sel], inv.values, u[sel], err, inv.tail, inv.richardson_change)

