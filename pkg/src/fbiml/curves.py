"""Unit-speed descent curves for h(t) = phi(t).xi and the arithmetic around them.

A curve starts with the normalized negative-gradient flow

    d alpha / d tau = - t(d phi(alpha)) xi / ||t(d phi(alpha)) xi||,   alpha(0) = t,

which stops on the box boundary or on the critical set Sigma_xi. From a
critical limit point the curve continues along a straight segment to a point
t0 with phi(t0).xi < 0 and then flows again.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import RK45, OdeSolution
from scipy.optimize import brentq, minimize_scalar

from .polymap import PolynomialMap
from .tube import Box

GRADIENT_FLOOR = 1e-9


def lemma_constant(theta: float, C_L: float) -> float:
    """((1 - theta)/(2 C_L))^(1/(1 - theta)): single flow arc decrease."""
    _check_certificate(theta, C_L)
    return ((1.0 - theta) / (2.0 * C_L)) ** (1.0 / (1.0 - theta))


def decrease_constant(theta: float, C_L: float) -> float:
    """(1/2)((1 - theta)/(8 C_L))^(1/(1 - theta)): decrease along a whole curve."""
    _check_certificate(theta, C_L)
    return 0.5 * ((1.0 - theta) / (8.0 * C_L)) ** (1.0 / (1.0 - theta))


def _check_certificate(theta: float, C_L: float) -> None:
    if not 0.5 <= theta < 1.0:
        raise ValueError(f"theta must lie in [1/2, 1), got {theta}")
    if not C_L > 0:
        raise ValueError("C_L must be positive")


@dataclass(frozen=True)
class OdeSpec:
    rtol: float = 1e-9
    atol: float = 1e-9
    floor: float = GRADIENT_FLOOR
    tau_max: float | None = None  # default 100 x box diameter


@dataclass
class FlowArc:
    start: np.ndarray
    tau: np.ndarray
    points: np.ndarray  # (K, n)
    delta1: float
    ell: np.ndarray
    cause: str  # "Boundary" | "Sigma" | "StepLimit"
    dense: object = field(default=None, repr=False)

    @property
    def length(self) -> float:
        return self.delta1

    def at(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if self.dense is None:
            return np.repeat(self.start[None, :], len(s), axis=0)
        tau_end = float(self.tau[-1])
        inner = np.clip(s, 0.0, tau_end)
        out = self.dense(inner).T
        # between the last solver step and delta1 the arc runs straight to ell
        tail = s > tau_end
        if tail.any() and self.delta1 > tau_end:
            w = ((s[tail] - tau_end) / (self.delta1 - tau_end))[:, None]
            out[tail] = (1 - w) * self.points[-1] + w * self.ell
        return out


@dataclass
class Segment:
    start: np.ndarray
    end: np.ndarray

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.end - self.start))

    def at(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))[:, None]
        L = self.length
        return self.start + (self.end - self.start) * (s / L if L > 0 else 0.0)


@dataclass
class DescentCurve:
    xi: np.ndarray
    start: np.ndarray
    pieces: list
    cause: str  # "Boundary" | "SigmaThenConcatenated" | "StepLimit"
    concatenations: int = 0

    @property
    def delta0(self) -> float:
        return float(sum(p.length for p in self.pieces))

    @property
    def terminal(self) -> np.ndarray:
        last = self.pieces[-1]
        return last.ell if isinstance(last, FlowArc) else last.end

    @property
    def junctions(self) -> list[float]:
        out, acc = [], 0.0
        for p in self.pieces[:-1]:
            acc += p.length
            out.append(acc)
        return out

    def at(self, tau) -> np.ndarray:
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        out = np.empty((len(tau), len(self.start)))
        acc = 0.0
        done = np.zeros(len(tau), dtype=bool)
        for i, p in enumerate(self.pieces):
            last = i == len(self.pieces) - 1
            sel = ~done & ((tau <= acc + p.length) | last)
            if sel.any():
                out[sel] = p.at(np.clip(tau[sel] - acc, 0.0, p.length))
                done |= sel
            acc += p.length
        return out

    def polyline_length(self, samples: int = 2000) -> float:
        taus = np.unique(np.concatenate([np.linspace(0, self.delta0, samples), self.junctions]))
        pts = self.at(taus)
        return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))


def _gradient(phi: PolynomialMap, xi: np.ndarray):
    return lambda t: phi.grad_transpose_apply(t, xi)


def integrate_flow(phi: PolynomialMap, xi, t, W0: Box, ode: OdeSpec | None = None) -> FlowArc:
    """Flow from t until the box boundary or the critical set.

    The solver is stepped by hand and each step's interpolant is scanned for
    a face crossing and for a dip of ||g|| before the next step is taken. A
    unit-speed step can jump straight over a thin dip without any event
    firing, and at a local minimum of h the field reverses sign, so waiting
    for the solver to finish would leave it chattering around the minimum.
    """
    ode = ode or OdeSpec()
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    grad = _gradient(phi, xi)
    g0 = float(np.linalg.norm(grad(t)))
    if g0 <= ode.floor:
        raise ValueError(f"start point {t.tolist()} lies on the critical set")
    if not W0.contains(t):
        raise ValueError("start point lies outside W0")
    hw = W0.hw
    tau_max = ode.tau_max or 100.0 * float(2 * np.linalg.norm(hw))
    small = max(1.0, g0) * 1e-6

    def rhs(_, a):
        g = grad(a)
        nrm = np.linalg.norm(g)
        return -g / nrm if nrm > 0 else np.zeros_like(g)

    solver = RK45(rhs, 0.0, t, tau_max, rtol=ode.rtol, atol=ode.atol)
    taus, pts, interps = [0.0], [t.copy()], []
    prev = np.inf

    def arc(stop: float, end: np.ndarray, cause: str) -> FlowArc:
        dense = OdeSolution(np.array(taus), interps) if interps else None
        tau = np.array(taus)
        keep = tau < stop
        tau = np.append(tau[keep], stop)
        p = np.vstack([np.array(pts)[keep], end])
        return FlowArc(t, tau, p, float(stop), end.copy(), cause, dense)

    while solver.status == "running":
        solver.step()
        if solver.status == "failed":
            break
        lo, hi = solver.t_old, solver.t
        dense = solver.dense_output()
        interps.append(dense)
        taus.append(hi)
        pts.append(solver.y.copy())
        dip, prev = _step_dip(grad, dense, lo, hi, prev, small)
        face = _face_crossing(dense, lo, hi, hw)
        if face is not None and (dip is None or face[0] <= dip):
            tau_hit, i, sign = face
            end = dense(tau_hit)
            end[i] = sign * hw[i]
            return arc(tau_hit, end, "Boundary")
        if dip is not None:
            return arc(dip, dense(dip), "Sigma")
        if np.linalg.norm(grad(solver.y)) <= ode.floor:
            return arc(hi, solver.y.copy(), "Sigma")
    if solver.status == "failed":
        # step size collapsed next to the critical set: finish along the current direction
        end = np.array(pts[-1])
        d = rhs(0.0, end)
        if not np.any(d) and len(pts) > 1:
            d = (pts[-1] - pts[-2]) / (np.linalg.norm(pts[-1] - pts[-2]) or 1.0)
        res = minimize_scalar(lambda s: np.linalg.norm(grad(end + s * d)), bounds=(0.0, 1e-3 * W0.inradius),
                              method="bounded", options={"xatol": 1e-13})
        out = arc(taus[-1], end, "Sigma")
        out.delta1 = float(taus[-1] + res.x)
        out.ell = end + res.x * d
        return out
    return arc(taus[-1], np.array(pts[-1]), "StepLimit")


def _face_crossing(dense, lo: float, hi: float, hw: np.ndarray):
    """Earliest (tau, axis, sign) in [lo, hi] where the path leaves the box."""
    a = dense(lo)
    best = None
    for i in range(len(hw)):
        for sign in (1.0, -1.0):
            f = lambda s, i=i, sign=sign: hw[i] - sign * dense(s)[i]  # noqa: E731
            if f(hi) > 0 or hw[i] - sign * a[i] < 0:
                continue
            tau = lo if f(lo) == 0 else brentq(f, lo, hi, xtol=1e-15)
            if best is None or tau < best[0]:
                best = (tau, i, sign)
    return best


def _step_dip(grad, dense, lo: float, hi: float, prev: float, small: float, per_step: int = 16):
    """First tau in a step where ||g|| has a local minimum below ``small``.

    ``prev`` is the previous step's second-to-last sample of ||g||, so a
    minimum sitting on the step boundary is not missed. Returns the tau (or
    None) and the value to carry into the next step.
    """
    fine = np.linspace(lo, hi, per_step + 1)
    g = np.linalg.norm(grad(dense(fine).T), axis=-1)
    v = np.concatenate([[prev], g])
    for k in range(1, len(v) - 1):
        if v[k] <= v[k - 1] and v[k] <= v[k + 1]:
            a, b = fine[max(k - 2, 0)], fine[k]
            res = minimize_scalar(lambda q: np.linalg.norm(grad(dense(q))), bounds=(a, b),
                                  method="bounded", options={"xatol": 1e-14})
            q, val = (res.x, res.fun) if res.fun <= v[k] else (fine[k - 1], v[k])
            if val <= small:
                return float(q), g[-2]
    return None, g[-2]


def _sphere(n: int, count: int, seed: int = 0) -> np.ndarray:
    if n == 1:
        return np.array([[-1.0], [1.0]])
    if n == 2:
        a = np.linspace(0, 2 * np.pi, count, endpoint=False)
        return np.stack([np.cos(a), np.sin(a)], axis=1)
    # deterministic low-discrepancy directions
    from scipy.stats import qmc

    u = qmc.Sobol(n, scramble=True, seed=seed).random(count)
    from scipy.special import ndtri

    v = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def find_t0(phi: PolynomialMap, xi, start, ell, delta1: float, W0: Box, theta: float, C_L: float,
            levels: int = 7, count: int = 64, lam: int = 33, floor: float = GRADIENT_FLOOR) -> np.ndarray | None:
    """Admissible continuation point t0 near a critical limit point ell, or None."""
    xi = np.asarray(xi, dtype=float)
    f = lambda p: phi.pairing(p, xi)  # noqa: E731
    need = 0.5 * lemma_constant(theta, C_L) * delta1 ** (1.0 / (1.0 - theta))
    level = min(0.0, float(f(ell)))
    fstart = float(f(start))
    sph = _sphere(len(ell), count)
    lams = np.linspace(0.0, 1.0, lam)
    best, best_val = None, math.inf
    for i in range(levels):
        r = delta1 * 0.5 ** i
        cand = ell + r * sph
        cand = cand[W0.contains(cand, strict=True)]
        if not len(cand):
            continue
        vals = f(cand)
        for p, v in zip(cand, vals):
            if not v < level or v >= best_val:
                continue
            if np.linalg.norm(phi.grad_transpose_apply(p, xi)) <= floor:
                continue
            seg = lams[:, None] * p + (1 - lams[:, None]) * ell
            if np.all(fstart - f(seg) >= need):
                best, best_val = p, float(v)
    return best


def build_gamma(phi: PolynomialMap, xi, t, W0: Box, theta: float, C_L: float, ode: OdeSpec | None = None,
                max_concat: int = 8) -> DescentCurve:
    _check_certificate(theta, C_L)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    pieces = []
    current = t
    concat = 0
    while True:
        arc = integrate_flow(phi, xi, current, W0, ode)
        pieces.append(arc)
        if arc.cause == "Boundary":
            cause = "Boundary" if concat == 0 else "SigmaThenConcatenated"
            break
        if arc.cause == "StepLimit":
            cause = "StepLimit"
            break
        if concat >= max_concat:
            cause = "StepLimit"
            break
        t0 = find_t0(phi, xi, arc.start, arc.ell, arc.delta1, W0, theta, C_L,
                     floor=(ode or OdeSpec()).floor)
        if t0 is None:
            raise RuntimeError(f"no admissible continuation point near {arc.ell.tolist()}: "
                               "openness fails numerically there")
        pieces.append(Segment(arc.ell, t0))
        current = t0
        concat += 1
    return DescentCurve(xi, t, pieces, cause, concat)


# -- verification ---------------------------------------------------------------------

@dataclass
class DecreaseReport:
    tau: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    min_slack: float
    slack_factor: float  # min over tau > 0 of lhs / rhs
    passed: bool
    witness: float | None
    lemma_rhs: np.ndarray | None = None
    lemma_passed: bool | None = None


def verify_decrease(curve: DescentCurve, phi: PolynomialMap, theta: float, C_L: float,
                    samples: int = 200, tol: float = 1e-9) -> DecreaseReport:
    _check_certificate(theta, C_L)
    samples = max(samples, 100)
    taus = np.unique(np.concatenate([np.linspace(0.0, curve.delta0, samples), curve.junctions]))
    f = lambda p: phi.pairing(p, curve.xi)  # noqa: E731
    lhs = float(f(curve.start)) - f(curve.at(taus))
    p = 1.0 / (1.0 - theta)
    rhs = decrease_constant(theta, C_L) * taus ** p
    slack = lhs - rhs
    ok = slack >= -tol
    pos = taus > 0
    factor = float(np.min(lhs[pos] / rhs[pos])) if pos.any() else math.inf
    witness = None if ok.all() else float(taus[np.argmin(slack)])
    lemma_rhs, lemma_ok = None, None
    first = curve.pieces[0]
    inside = taus <= first.length
    lemma_rhs = np.where(inside, lemma_constant(theta, C_L) * taus ** p, np.nan)
    lemma_ok = bool(np.all(lhs[inside] >= lemma_rhs[inside] - tol))
    return DecreaseReport(taus, lhs, rhs, float(slack.min()), factor, bool(ok.all()), witness, lemma_rhs, lemma_ok)


def length_bound(theta: float, C_L: float, sup_phi: float) -> float:
    """3 (2 sup ||phi||)^(1 - theta) (1 - theta)^(-1) 2 C_L."""
    return 3.0 * (2.0 * sup_phi) ** (1.0 - theta) / (1.0 - theta) * 2.0 * C_L


def sup_norm(phi: PolynomialMap, box: Box, nodes: int = 41) -> float:
    pts = np.vstack([box.grid_points(nodes), box.corners()])
    return float(np.max(np.linalg.norm(phi.eval(pts), axis=-1)))


@dataclass
class PropReport:
    curves: int
    min_delta0: float
    required_delta0: float
    max_length: float
    length_bound: float
    delta_ok: bool
    length_ok: bool
    decrease_ok: bool
    unit_speed_error: float
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.delta_ok and self.length_ok and self.decrease_ok


def verify_prop_properties(phi: PolynomialMap, directions, starts, W0: Box, W1: Box, theta: float, C_L: float,
                           ode: OdeSpec | None = None, tol: float = 1e-3, keep_curves: bool = False):
    """Check delta0 >= r - r1 and the length bound over a (direction, start) family."""
    _check_certificate(theta, C_L)
    if np.any(W1.hw >= W0.hw):
        raise ValueError("W1 must be strictly smaller than W0")
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    floor = (ode or OdeSpec()).floor
    bound = length_bound(theta, C_L, sup_norm(phi, W0))
    required = W0.inradius - W1.inradius
    deltas, lengths, speed_err = [], [], 0.0
    failures, curves = [], []
    decrease_ok = True
    for xi in directions:
        for t in starts:
            if np.linalg.norm(phi.grad_transpose_apply(t, xi)) <= floor:
                continue
            try:
                c = build_gamma(phi, xi, t, W0, theta, C_L, ode)
            except RuntimeError as exc:
                failures.append({"xi": xi.tolist(), "t": t.tolist(), "error": str(exc)})
                continue
            d0 = c.delta0
            deltas.append(d0)
            lengths.append(d0)
            pl = c.polyline_length(400)
            speed_err = max(speed_err, abs(pl - d0) / max(d0, 1e-300))
            rep = verify_decrease(c, phi, theta, C_L, samples=100)
            decrease_ok &= rep.passed
            if keep_curves:
                curves.append((c, rep))
    if not deltas:
        raise ValueError("empty curve family")
    report = PropReport(len(deltas), float(min(deltas)), required, float(max(lengths)), bound,
                        min(deltas) >= required * (1 - tol), max(lengths) <= bound * (1 + tol),
                        decrease_ok and not failures, speed_err, failures)
    return (report, curves) if keep_curves else report


def flow_monotone(arc: FlowArc, phi: PolynomialMap, xi, samples: int = 200, tol: float = 0.0) -> bool:
    """h(tau) = phi(alpha(tau)).xi is decreasing along the arc, sample-wise."""
    taus = np.linspace(0.0, arc.delta1, samples)
    h = phi.pairing(arc.at(taus), np.asarray(xi, dtype=float))
    return bool(np.all(np.diff(h) <= tol))


def semigroup_defect(phi: PolynomialMap, xi, t, W0: Box, tau1: float, tau2: float, ode: OdeSpec | None = None) -> float:
    """|alpha_t(tau1 + tau2) - alpha_{alpha_t(tau1)}(tau2)|."""
    a = integrate_flow(phi, xi, t, W0, ode)
    if tau1 + tau2 > a.delta1:
        raise ValueError("requested times exceed the arc")
    mid = a.at(tau1)[0]
    b = integrate_flow(phi, xi, mid, W0, ode)
    return float(np.linalg.norm(a.at(tau1 + tau2)[0] - b.at(tau2)[0]))


def power_inequalities_hold(a, b, r) -> np.ndarray:
    """(b - a)^r <= b^r - a^r and (a + b)^r <= 2^r (a^r + b^r) for 0 < a <= b, r > 1 (rounding-tolerant)."""
    a, b, r = (np.asarray(v, dtype=float) for v in (a, b, r))
    br, ar = b ** r, a ** r
    first = (b - a) ** r <= (br - ar) * (1 + 1e-12) + 1e-300
    second = (a + b) ** r <= 2.0 ** r * (ar + br) * (1 + 1e-12)
    return first & second


# -- window and threshold arithmetic ---------------------------------------------------

@dataclass
class KappaWindow:
    lo: float
    hi: float
    kappa: float
    exponent: float | None  # (2 theta + kappa - 2)/(2 theta - 1), None when theta = 1/2
    degenerate: bool  # theta = 1/2 branch

    @property
    def width(self) -> float:
        return self.hi - self.lo


def kappa_window(s: float, theta: float) -> KappaWindow:
    if not s > 1:
        raise ValueError("s must exceed 1")
    if not 0.5 <= theta < 1:
        raise ValueError("theta must lie in [1/2, 1)")
    lo = 1.0 / s
    hi = (2.0 * theta - 1.0) / s + 2.0 - 2.0 * theta
    kappa = 0.5 * (lo + hi)
    if theta == 0.5:
        return KappaWindow(lo, hi, kappa, None, True)
    expo = (2.0 * theta + kappa - 2.0) / (2.0 * theta - 1.0)
    if not expo < 1.0 / s:
        raise ArithmeticError(f"exponent {expo} is not below 1/s = {1.0 / s}")
    return KappaWindow(lo, hi, kappa, expo, False)


def g_function(tau, xi_abs: float, c: float, c1: float, theta: float, kappa: float):
    tau = np.asarray(tau, dtype=float)
    return c * xi_abs * tau ** (1.0 / (1.0 - theta)) - c1 * xi_abs ** kappa * tau ** 2


def g_minimum(xi_abs: float, c: float, c1: float, theta: float, kappa: float) -> tuple[float, float]:
    """(tau0, g(tau0)) for theta > 1/2 in closed form."""
    A = 2.0 * c1 * (1.0 - theta) / c
    tau0 = (A * xi_abs ** (kappa - 1.0)) ** ((1.0 - theta) / (2.0 * theta - 1.0))
    gmin = xi_abs ** ((2 * theta + kappa - 2) / (2 * theta - 1)) * (
        c * A ** (1.0 / (2 * theta - 1)) - c1 * A ** ((2 - 2 * theta) / (2 * theta - 1)))
    return tau0, gmin


def g_minimum_brute(xi_abs: float, c: float, c1: float, theta: float, kappa: float, tau0: float) -> float:
    """Bounded scalar minimization of g around the closed-form minimizer."""
    res = minimize_scalar(lambda tau: float(g_function(tau, xi_abs, c, c1, theta, kappa)),
                          bounds=(0.0, 4.0 * tau0), method="bounded",
                          options={"xatol": 1e-12 * max(tau0, 1e-300)})
    return float(res.fun)


@dataclass
class XiThreshold:
    threshold: float  # theta = 1/2: (c1/c)^(1/(1-kappa)); else the delta formula
    formula_threshold: float  # [8 C_phi^2 / (c delta^(1/(1-theta) - 2))]^(1/(1-kappa))
    c1: float
    tau0: float | None = None
    g_min: float | None = None
    g_min_brute: float | None = None
    xi_abs: float | None = None


def xi_threshold(C_phi: float, c: float, theta: float, kappa: float, delta: float,
                 xi_abs: float | None = None) -> XiThreshold:
    for name, v in (("C_phi", C_phi), ("c", c), ("theta", theta), ("kappa", kappa), ("delta", delta)):
        if not v > 0:
            raise ValueError(f"{name} must be positive")
    if not kappa < 1 or not theta < 1:
        raise ValueError("need kappa < 1 and theta < 1")
    c1 = 4.0 * C_phi ** 2
    thr = (8.0 * C_phi ** 2 / (c * delta ** (1.0 / (1.0 - theta) - 2.0))) ** (1.0 / (1.0 - kappa))
    if theta == 0.5:
        return XiThreshold((c1 / c) ** (1.0 / (1.0 - kappa)), thr, c1)
    xa = xi_abs if xi_abs is not None else max(thr, 1.0)
    tau0, gmin = g_minimum(xa, c, c1, theta, kappa)
    brute = g_minimum_brute(xa, c, c1, theta, kappa, tau0)
    return XiThreshold(thr, thr, c1, tau0, gmin, brute, xa)


def lipschitz_constant(phi: PolynomialMap, box: Box, nodes: int = 41) -> float:
    """max over a grid of the operator norm of d phi."""
    pts = np.vstack([box.grid_points(nodes), box.corners()])
    return float(np.max(np.linalg.norm(phi.jacobian(pts), ord=2, axis=(-2, -1))))
