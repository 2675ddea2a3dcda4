"""Checks for the descent condition on t -> phi(t).xi.

The condition at xi0 asks, on a box W0 and a cone of directions around xi0, for

* openness of t -> phi(t).xi, and
* a Lojasiewicz inequality |phi(t).xi|^theta <= C_L ||t(d phi(t)) xi|| with 1/2 <= theta < 1.

Everything here is numerical evidence at a stated resolution, not proof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.optimize import minimize

from .polymap import PolynomialMap
from .tube import Box

THETA_GRID = tuple(float(v) for v in np.round(np.arange(0.5, 0.951, 0.05), 2))
GRADIENT_FLOOR = 1e-9


@dataclass(frozen=True)
class Cone:
    """Open circular cone {angle(xi, center) < half_angle}."""

    center: tuple[float, ...]
    half_angle: float = 0.25

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        nrm = np.linalg.norm(c)
        if nrm == 0:
            raise ValueError("cone center must be nonzero")
        if not 0 < self.half_angle < math.pi / 2:
            raise ValueError("cone half-angle must lie in (0, pi/2)")
        object.__setattr__(self, "center", tuple(float(v) for v in c / nrm))

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def axis(self) -> np.ndarray:
        return np.array(self.center)

    def contains(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        cosang = (xi @ self.axis) / np.linalg.norm(xi, axis=-1)
        return np.arccos(np.clip(cosang, -1.0, 1.0)) < self.half_angle

    def sample(self, count: int = 17, seed: int = 0) -> np.ndarray:
        """Unit directions covering the closure of a slightly smaller cone; center first."""
        c = self.axis
        if self.dim == 1:
            return c[None, :]
        a = self.half_angle * (1.0 - 1e-9)
        if self.dim == 2:
            base = math.atan2(c[1], c[0])
            ang = base + np.concatenate([[0.0], np.linspace(-a, a, max(count - 1, 2))])
            return np.stack([np.cos(ang), np.sin(ang)], axis=1)
        rng = np.random.default_rng(seed)
        v = rng.normal(size=(count - 1, self.dim))
        v -= np.outer(v @ c, c)
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        beta = a * rng.random(count - 1)
        pts = np.cos(beta)[:, None] * c + np.sin(beta)[:, None] * v
        return np.vstack([c, pts])

    def to_json(self) -> dict:
        return {"center": list(self.center), "half_angle": self.half_angle}


def _check_xi(phi: PolynomialMap, xi) -> np.ndarray:
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.shape != (phi.m,):
        raise ValueError(f"xi must have {phi.m} entries")
    if not np.any(xi):
        raise ValueError("xi must be nonzero")
    return xi


def _default_nodes(n: int) -> int:
    return {1: 41, 2: 21}.get(n, 9)


def _sphere(n: int, count: int, seed: int = 0) -> np.ndarray:
    if n == 1:
        return np.array([[-1.0], [1.0]])
    if n == 2:
        ang = np.linspace(0, 2 * np.pi, count, endpoint=False)
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    v = np.random.default_rng(seed).normal(size=(count, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


# -- Sigma_xi ------------------------------------------------------------------

@dataclass
class SigmaSet:
    points: np.ndarray
    norms: np.ndarray
    threshold: float
    labels: np.ndarray  # connected-component label per grid node, 0 = outside
    components: int

    @property
    def fraction(self) -> float:
        return float(np.mean(self.labels > 0))


def sigma_set(phi: PolynomialMap, xi, W0: Box, nodes: int = 41, threshold: float = GRADIENT_FLOOR) -> SigmaSet:
    """Grid approximation of {t : t(d phi(t)) xi = 0} as a sub-threshold region."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    xi = _check_xi(phi, xi)
    pts = W0.grid_points(nodes)
    g = np.linalg.norm(phi.grad_transpose_apply(pts, xi), axis=-1)
    shape = (nodes,) * phi.n
    labels, count = ndimage.label((g < threshold).reshape(shape))
    return SigmaSet(pts, g, threshold, labels.ravel(), int(count))


# -- openness ------------------------------------------------------------------

@dataclass
class OpennessVerdict:
    status: str  # "Open" | "NotOpen" | "Inconclusive"
    finest_radius: float
    witness: list[float] | None = None
    witness_radius: float | None = None
    witness_kind: str | None = None  # "local-minimum" | "local-maximum"
    local_minima: list[list[float]] = field(default_factory=list)
    local_maxima: list[list[float]] = field(default_factory=list)
    centers_tested: int = 0
    unresolved: int = 0

    @property
    def origin_local_minimum(self) -> bool:
        return any(np.linalg.norm(p) < 1e-6 for p in self.local_minima)

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _extremal(f, centers, radii, sphere, box: Box):
    """Per center and radius: is f(c) <= min or >= max over the sphere? (NaN-free masks.)"""
    fc = f(centers)
    dist = box.distance_to_boundary(centers)
    lo = np.zeros((len(centers), len(radii)), dtype=bool)
    hi = np.zeros_like(lo)
    valid = np.zeros_like(lo)
    for k, r in enumerate(radii):
        ok = dist >= r
        if not ok.any():
            continue
        vals = f(centers[ok][:, None, :] + r * sphere[None, :, :])
        lo[ok, k] = fc[ok] <= vals.min(axis=1)
        hi[ok, k] = fc[ok] >= vals.max(axis=1)
        valid[ok, k] = True
    return lo, hi, valid


def check_openness(phi: PolynomialMap, xi, W0: Box, nodes: int | None = None, levels: int = 8,
                   sphere_count: int = 32, seed: int = 0, polish: int = 20) -> OpennessVerdict:
    """Two-sided surrounding test on dyadic spheres around grid centers."""
    xi = _check_xi(phi, xi)
    n = phi.n
    nodes = nodes or _default_nodes(n)
    if nodes < 3:
        raise ValueError("openness check needs at least 3 nodes per axis")
    f = lambda t: phi.pairing(t, xi)  # noqa: E731
    grid = W0.grid_points(nodes)
    interior = W0.contains(grid, strict=True)
    centers = grid[interior]
    if not len(centers):
        raise ValueError("degenerate grid: no interior centers")
    sphere = _sphere(n, sphere_count, seed)
    r0 = 0.25 * W0.inradius
    radii = r0 * 0.5 ** np.arange(levels)
    lo, hi, valid = _extremal(f, centers, radii, sphere, W0)

    def classify(lo, hi, valid):
        nvalid = valid.sum(axis=1)
        all_lo = (nvalid >= 2) & np.all(lo | ~valid, axis=1)
        all_hi = (nvalid >= 2) & np.all(hi | ~valid, axis=1)
        finest = np.array([np.nonzero(v)[0].max() if v.any() else -1 for v in valid])
        at_finest = np.array([(lo[i, k] or hi[i, k]) if k >= 0 else False for i, k in enumerate(finest)])
        return all_lo, all_hi, at_finest

    all_lo, all_hi, at_finest = classify(lo, hi, valid)
    minima = [c.tolist() for c in centers[all_lo]]
    maxima = [c.tolist() for c in centers[all_hi]]
    unresolved = int(np.sum(at_finest & ~(all_lo | all_hi)))

    # polish discrete extrema of the grid values toward true local extrema
    shape = (nodes,) * n
    F = f(grid).reshape(shape)
    inner = interior.reshape(shape)
    bounds = [(-h, h) for h in W0.half_widths]
    finest_r = float(radii[-1])
    for sign, bucket in ((1.0, minima), (-1.0, maxima)):
        filt = ndimage.minimum_filter(sign * F, size=3, mode="nearest")
        cand = np.argwhere((sign * F <= filt) & inner)
        cand = cand[np.argsort((sign * F)[tuple(cand.T)])][:polish]
        for idx in cand:
            t0 = grid[np.ravel_multi_index(tuple(idx), shape)]
            res = minimize(lambda t: sign * float(f(t)), t0,
                           jac=lambda t: sign * phi.grad_transpose_apply(t, xi),
                           method="L-BFGS-B", bounds=bounds)
            p = res.x
            d = float(W0.distance_to_boundary(p))
            if d <= 1e-9 or any(np.allclose(p, q, atol=1e-7) for q in bucket):
                continue
            pr = min(r0, 0.5 * d) * 0.5 ** np.arange(levels + 4)
            plo, phi_, pvalid = _extremal(f, p[None, :], pr, sphere, W0)
            pl, ph, _ = classify(plo, phi_, pvalid)
            finest_r = min(finest_r, float(pr[-1]))
            if (sign > 0 and pl[0]) or (sign < 0 and ph[0]):
                bucket.append(p.tolist())

    if minima or maxima:
        kind = "local-minimum" if minima else "local-maximum"
        w = (minima or maxima)[0]
        return OpennessVerdict("NotOpen", finest_r, w, float(radii[-1]), kind, minima, maxima,
                               len(centers), unresolved)
    status = "Inconclusive" if unresolved else "Open"
    return OpennessVerdict(status, finest_r, None, None, None, [], [], len(centers), unresolved)


# -- Lojasiewicz estimation ------------------------------------------------------

@dataclass
class StarCertificate:
    xi0: list[float]
    cone: Cone
    W0: Box
    theta: float
    C_L: float
    method: str  # "grid-estimate" | "homogeneous-lemma" | "cone-criterion"
    openness: list[dict] = field(default_factory=list)
    evidence: list[dict] = field(default_factory=list)
    theta_required: float | None = None
    excluded_fraction: float = 0.0
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not 0.5 <= self.theta < 1.0:
            raise ValueError(f"certificate exponent {self.theta} outside [1/2, 1)")
        if not self.C_L > 0:
            raise ValueError("certificate constant must be positive")

    def to_json(self) -> dict:
        return {"status": "certificate", "xi0": self.xi0, "cone": self.cone.to_json(),
                "W0": list(self.W0.half_widths), "theta": self.theta, "C_L": self.C_L,
                "method": self.method, "openness": self.openness, "evidence": self.evidence,
                "theta_required": self.theta_required, "excluded_fraction": self.excluded_fraction,
                "notes": self.notes}


@dataclass
class LojasiewiczFailure:
    theta_required: float
    reason: str
    envelope: list[tuple[float, float]] = field(default_factory=list)  # (v, min gradient)
    openness: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"status": "failure", "theta_required": self.theta_required, "reason": self.reason,
                "envelope": [list(e) for e in self.envelope], "openness": self.openness}


def validate_inequality(phi: PolynomialMap, dirs: np.ndarray, pts: np.ndarray, theta: float,
                        C_L: float, floor: float = GRADIENT_FLOOR, tol: float = 1e-9) -> tuple[int, float]:
    """(violations, worst ratio) of |P|^theta <= C_L |grad P| + tol over pts x dirs, off the floor."""
    P = phi.eval(pts) @ dirs.T
    g = np.linalg.norm(np.einsum("nmj,km->nkj", phi.jacobian(pts), dirs), axis=-1)
    keep = g >= floor
    lhs = np.abs(P) ** theta
    viol = int(np.sum(keep & (lhs > C_L * g + tol)))
    worst = float(np.max(np.where(keep, lhs / np.where(keep, g, 1.0), 0.0))) if keep.any() else 0.0
    return viol, worst


def _ratio_table(phi, dirs, pts, floor):
    P = phi.eval(pts) @ dirs.T  # (N, K)
    g = np.linalg.norm(np.einsum("nmj,km->nkj", phi.jacobian(pts), dirs), axis=-1)
    keep = g >= floor
    return np.abs(P), g, keep


def _grid_C(absP, g, keep, theta):
    r = np.where(keep, absP ** theta / np.where(keep, g, 1.0), 0.0)
    return float(r.max()), r


def _envelope(phi: PolynomialMap, cone: Cone, W0: Box, sign: float, floor: float,
              start_pts, start_dirs, steps: int = 60, q: float = 10 ** -0.25) -> list[tuple[float, float]]:
    """Continuation in v of min ||t(d phi) u|| over {phi(t).u = sign v, u in cone}."""
    n, m = phi.n, phi.m
    c = cone.axis
    free_u = m > 1
    absP = phi.eval(start_pts) @ start_dirs.T * sign
    gtab = np.linalg.norm(np.einsum("nmj,km->nkj", phi.jacobian(start_pts), start_dirs), axis=-1)
    pos = absP > 0
    if not pos.any():
        return []
    v = 0.1 * float(absP[pos].max())
    bounds = [(-h, h) for h in W0.half_widths] + ([(-1.0, 1.0)] * m if free_u else [])

    def split(z):
        return (z[:n], z[n:]) if free_u else (z, c)

    def obj(z):
        t, u = split(z)
        g = phi.grad_transpose_apply(t, u)
        gg = float(g @ g) + 1e-300
        H = np.einsum("k,kij->ij", u, phi.hessians(t))
        dt = 2.0 * H @ g / gg
        if not free_u:
            return math.log(gg), dt
        du = 2.0 * phi.jacobian(t) @ g / gg
        return math.log(gg), np.concatenate([dt, du])

    def seed_for(v):
        score = np.where(pos, np.abs(np.log(np.maximum(absP, 1e-300) / v)) + 1e-3 * np.log(gtab + 1e-300), np.inf)
        i, k = np.unravel_index(np.argmin(score), score.shape)
        t = start_pts[i]
        return np.concatenate([t, start_dirs[k]]) if free_u else t.copy()

    out = []
    z = seed_for(v)
    for _ in range(steps):
        cons = [{"type": "eq",
                 "fun": lambda z, v=v: float(phi.pairing(split(z)[0], split(z)[1])) / (sign * v) - 1.0,
                 "jac": lambda z, v=v: np.concatenate(
                     [phi.grad_transpose_apply(split(z)[0], split(z)[1]), phi.eval(split(z)[0])]
                     if free_u else [phi.grad_transpose_apply(z, c)]) / (sign * v)}]
        if free_u:
            cons.append({"type": "eq", "fun": lambda z: float(z[n:] @ z[n:]) - 1.0,
                         "jac": lambda z: np.concatenate([np.zeros(n), 2.0 * z[n:]])})
            cons.append({"type": "ineq", "fun": lambda z: float(z[n:] @ c) - math.cos(cone.half_angle),
                         "jac": lambda z: np.concatenate([np.zeros(n), c])})
        best = None
        for z0 in (z, seed_for(v)):
            res = minimize(obj, z0, jac=True, method="SLSQP", bounds=bounds, constraints=cons,
                           options={"maxiter": 300, "ftol": 1e-12})
            viol = max(abs(cf["fun"](res.x)) for cf in cons if cf["type"] == "eq")
            if viol < 1e-6 and (best is None or res.fun < best.fun):
                best = res
        if best is None:
            break
        z = best.x
        G = math.exp(0.5 * best.fun)
        out.append((v, G))
        if G < 10 * floor:
            break
        v *= q
    return out


def _slope(env: list[tuple[float, float]]) -> float | None:
    if len(env) < 6:
        return None
    pts = np.log(np.array(env[len(env) // 2:]))
    return float(np.polyfit(pts[:, 0], pts[:, 1], 1)[0])


def _polish_ratio(phi, xi, t0, theta, W0, floor):
    bounds = [(-h, h) for h in W0.half_widths]

    def neg(t):
        P = float(phi.pairing(t, xi))
        g = phi.grad_transpose_apply(t, xi)
        gg = float(g @ g)
        if gg < floor ** 2 or P == 0.0:
            return 0.0, np.zeros_like(t)
        H = np.einsum("k,kij->ij", xi, phi.hessians(t))
        val = theta * math.log(abs(P)) - 0.5 * math.log(gg)
        grad = theta * g / P - H @ g / gg
        return -val, -grad

    res = minimize(neg, t0, jac=True, method="L-BFGS-B", bounds=bounds)
    g = np.linalg.norm(phi.grad_transpose_apply(res.x, xi))
    if g < floor:
        return 0.0
    return float(abs(phi.pairing(res.x, xi)) ** theta / g)


def estimate_lojasiewicz(phi: PolynomialMap, cone: Cone, W0: Box, nodes: int | None = None,
                         theta_grid=THETA_GRID, directions: int = 17, floor: float = GRADIENT_FLOOR,
                         seed: int = 0) -> StarCertificate | LojasiewiczFailure:
    """Smallest stable theta in the grid with its constant C_L, or the exponent the data demands."""
    if cone.dim != phi.m:
        raise ValueError("cone dimension does not match phi")
    n = phi.n
    N = nodes or {1: 2001, 2: 101, 3: 25}.get(n, 11)
    dirs = cone.sample(directions, seed)
    coarse = W0.grid_points(N)
    fine = W0.grid_points(2 * N - 1)
    absP, g, keep = _ratio_table(phi, dirs, coarse, floor)
    absPf, gf, keepf = _ratio_table(phi, dirs, fine, floor)
    if not keepf.any():
        raise ValueError("every grid sample lies below the gradient floor")
    excluded = float(1.0 - keepf.mean())

    envelope = []
    slopes = []
    for sign in (1.0, -1.0):
        env = _envelope(phi, cone, W0, sign, floor, coarse, dirs)
        envelope += env
        s = _slope(env)
        if s is not None:
            slopes.append(s)
    theta_req = max([0.5] + slopes)

    cands = set(theta_grid)
    hom = phi.homogeneity()
    if hom.is_homogeneous and hom.degree and hom.degree >= 2:
        cands.add(1.0 - 1.0 / hom.degree)
    cands = sorted(th for th in cands if th >= theta_req - 0.01 and th < 1.0)
    for th in cands:
        c1, _ = _grid_C(absP, g, keep, th)
        c2, r2 = _grid_C(absPf, gf, keepf, th)
        if c1 <= 0 or c2 / c1 >= 1.5:
            continue
        env_c = max((v ** th / G for v, G in envelope if G >= floor), default=0.0)
        C_L = max(c1, c2, env_c)
        # polish the best grid ratios
        flat = np.argsort(r2.ravel())[::-1][:5]
        evidence = []
        for f_ in flat:
            i, k = np.unravel_index(f_, r2.shape)
            C_L = max(C_L, _polish_ratio(phi, dirs[k], fine[i], th, W0, floor))
            evidence.append({"t": fine[i].tolist(), "xi": dirs[k].tolist(), "ratio": float(r2[i, k])})
        return StarCertificate(list(cone.center), cone, W0, float(th), float(C_L), "grid-estimate",
                               evidence=evidence, theta_required=theta_req, excluded_fraction=excluded)
    reason = ("exponent demanded by the level-set envelope is not below 1" if theta_req >= 1.0
              else "no exponent in the grid gave a refinement-stable constant")
    return LojasiewiczFailure(theta_req, reason, envelope)


# -- homogeneous polynomials -----------------------------------------------------

@dataclass
class HomogeneousCertificate:
    theta: float
    C: float
    k: int
    validated: bool
    violations: int
    samples: int
    directions: int

    @property
    def C_L(self) -> float:
        return self.C ** self.theta

    def to_json(self) -> dict:
        return dict(self.__dict__, C_L=self.C_L)


class CertificateUnavailable(ValueError):
    pass


def _radial_sup(P: PolynomialMap, k: int, dirs: np.ndarray) -> tuple[float, np.ndarray]:
    val = np.abs(P.eval(dirs)[:, 0])
    grad = np.linalg.norm(P.jacobian(dirs)[:, 0, :], axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(grad > 0, val / grad ** (k / (k - 1.0)), np.where(val > 0, np.inf, 0.0))
    return float(np.max(r)), r


def homogeneous_certificate(phi: PolynomialMap, xi=None, samples: int = 10_000, seed: int = 0,
                            tol: float = 1e-9) -> HomogeneousCertificate:
    """sup_A |P| over A = {|grad P| <= 1} for homogeneous P = phi.xi of degree k >= 2.

    Along a ray t = rho d the set A ends at rho = |grad P(d)|^(-1/(k-1)), so the sup
    reduces to the unit sphere: C = sup_d |P(d)| / |grad P(d)|^(k/(k-1)).
    """
    P = phi if (xi is None and phi.m == 1) else phi.dot(_check_xi(phi, xi))
    hom = P.homogeneity()
    if not hom.is_homogeneous or hom.degree is None:
        raise ValueError("homogeneous certificate needs a homogeneous polynomial")
    k = hom.degree
    if k < 2:
        raise ValueError("homogeneous certificate needs degree k >= 2")
    n = P.n
    count = 64
    prev = None
    C = 0.0
    argbest = None
    for _ in range(12):
        dirs = _sphere(n, count, seed) if n <= 2 else _sphere(n, count * 8, seed)
        C, r = _radial_sup(P, k, dirs)
        if not math.isfinite(C):
            raise CertificateUnavailable("|P| unbounded on {|grad P| <= 1}: critical ray with P != 0")
        argbest = dirs[int(np.argmax(r))]
        if prev is not None and C <= prev * (1 + 1e-9) + 1e-300:
            break
        if prev is not None and prev > 0 and C > 4 * prev and count > 4096:
            raise CertificateUnavailable("sup over {|grad P| <= 1} does not stabilize under refinement")
        prev = C
        count *= 2
    if n >= 2 and argbest is not None:
        # polish the best direction on the sphere
        def neg(d):
            d = d / np.linalg.norm(d)
            val, _ = _radial_sup(P, k, d[None, :])
            return -val if math.isfinite(val) else 0.0

        res = minimize(neg, argbest, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-16})
        C = max(C, -float(res.fun))
    theta = (k - 1) / k  # correctly rounded, so theta == 2/3 for k = 3
    rng = np.random.default_rng(seed + 1)
    pts = rng.uniform(-1.0, 1.0, size=(samples, n))
    lhs = np.abs(P.eval(pts)[:, 0]) ** theta
    rhs = C ** theta * np.linalg.norm(P.jacobian(pts)[:, 0, :], axis=-1)
    viol = int(np.sum(lhs > rhs + tol))
    return HomogeneousCertificate(theta, C, k, viol == 0, viol, samples, len(dirs) if n > 1 else 2)


def homogeneous_star(phi: PolynomialMap, cone: Cone, W0: Box, directions: int = 17) -> StarCertificate:
    """Certificate over the cone from per-direction homogeneous certificates."""
    best = None
    for d in cone.sample(directions):
        hc = homogeneous_certificate(phi, d)
        if best is None or hc.C > best.C:
            best = hc
    return StarCertificate(list(cone.center), cone, W0, best.theta, best.C_L, "homogeneous-lemma",
                           theta_required=best.theta, notes=[f"degree k={best.k}, C={best.C:.6g}"])


# -- two-component cone criterion --------------------------------------------------

@dataclass
class ConeCriterion:
    holds: bool
    k: int
    rho: float
    rho_prime: float
    witness: list[float] | None = None
    margin: float = 0.0  # min over the circle of ||grad phi1||_1 - rho ||grad phi2||_1
    stated_bound_ok: bool | None = None  # (1 - rho'/rho) factor
    squared_bound_ok: bool | None = None  # (1 - rho'/rho)^2 factor
    certificate: StarCertificate | None = None
    openness: dict | None = None

    def to_json(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "certificate"}
        out["certificate"] = None if self.certificate is None else self.certificate.to_json()
        return out


def cone_criterion(phi1: PolynomialMap, phi2: PolynomialMap, rho: float, rho_prime: float | None = None,
                   nodes: int = 720, W0: Box | None = None, samples: int = 10_000,
                   seed: int = 0) -> ConeCriterion:
    """Gradient domination rho ||grad phi2||_1 <= ||grad phi1||_1 on the unit circle.

    Directions are taken in the symmetric cone |xi2| < rho' xi1 around (1, 0).
    """
    if phi1.n != 2 or phi2.n != 2 or phi1.m != 1 or phi2.m != 1:
        raise ValueError("cone criterion takes two scalar polynomials on R^2")
    rho_prime = 0.5 * rho if rho_prime is None else rho_prime
    if not 0 < rho_prime < rho < 1:
        raise ValueError("need 0 < rho' < rho < 1")
    h1, h2 = phi1.homogeneity(), phi2.homogeneity()
    if not h1.is_homogeneous or h1.degree is None:
        raise ValueError("phi1 must be homogeneous and nonzero")
    if not h2.is_homogeneous or (h2.degree is not None and h2.degree != h1.degree):
        raise ValueError("phi1 and phi2 must be homogeneous of the same degree")
    k = h1.degree
    ang = np.linspace(0, 2 * np.pi, nodes, endpoint=False)
    circ = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    g1 = np.abs(phi1.jacobian(circ)[:, 0, :]).sum(-1)
    g2 = np.abs(phi2.jacobian(circ)[:, 0, :]).sum(-1)
    margin = g1 - rho * g2
    i = int(np.argmin(margin))
    if margin[i] < -1e-12:
        return ConeCriterion(False, k, rho, rho_prime, circ[i].tolist(), float(margin[i]))
    if g1.min() <= 0:
        return ConeCriterion(False, k, rho, rho_prime, circ[int(np.argmin(g1))].tolist(), float(margin[i]))
    phi = PolynomialMap(2, [phi1.components[0], phi2.components[0]])
    cone = Cone((1.0, 0.0), math.atan(rho_prime))
    W0 = W0 or Box((1.0, 1.0))
    # sampled check of both forms of the gradient lower bound
    rng = np.random.default_rng(seed)
    ts = rng.uniform(-1, 1, size=(samples, 2))
    a = rng.uniform(-math.atan(rho_prime), math.atan(rho_prime), samples) * (1 - 1e-9)
    xis = np.stack([np.cos(a), np.sin(a)], axis=1)
    gp = np.einsum("nmj,nm->nj", phi.jacobian(ts), xis)
    lhs = np.sum(gp ** 2, axis=1)
    l1 = np.abs(phi1.jacobian(ts)[:, 0, :]).sum(-1)
    base = 0.5 * xis[:, 0] ** 2 * l1 ** 2
    f = 1.0 - rho_prime / rho
    stated = bool(np.all(lhs >= f * base * (1 - 1e-12) - 1e-15))
    squared = bool(np.all(lhs >= f * f * base * (1 - 1e-12) - 1e-15))
    cert = None
    if k >= 2:
        cert = homogeneous_star(phi, cone, W0)
        cert.method = "cone-criterion"
    op = check_openness(phi, cone.axis, W0)
    return ConeCriterion(True, k, rho, rho_prime, None, float(margin[i]), stated, squared, cert, op.to_json())


# -- the two-dimensional counterexample -------------------------------------------

@dataclass
class MaireDiagnostic:
    t1: np.ndarray
    value: np.ndarray  # |Phi(t).xi| along the path
    gradient: np.ndarray  # ||t(d Phi(t)) xi|| along the path
    slope: float  # d log|Phi.xi| / d log||grad||  (-> 3/4)
    theta_required: float  # d log||grad|| / d log|Phi.xi| (-> 4/3)


def maire_phi() -> PolynomialMap:
    """phi = (-3 t1, (t1 t2 + 1) t1^3), so that Z1 = x1 - 3 i t1."""
    return PolynomialMap(2, [[((1, 0), -3.0)], [((3, 0), 1.0), ((4, 1), 1.0)]])


def maire_path(t1: np.ndarray, sign: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Points t = (t1, 0) and unit directions xi = sign (t1^2, 1)/sqrt(1 + t1^4)."""
    t1 = np.asarray(t1, dtype=float)
    s = np.sqrt(1.0 + t1 ** 4)
    xi = sign * np.stack([t1 ** 2 / s, 1.0 / s], axis=-1)
    t = np.stack([t1, np.zeros_like(t1)], axis=-1)
    return t, xi


def maire_diagnostic(t1_min: float = 1e-3, t1_max: float = 1e-1, count: int = 41, sign: float = 1.0) -> MaireDiagnostic:
    if not 0 < t1_min < t1_max <= 0.3:
        raise ValueError("t1 range must lie in (0, 0.3]")
    if count < 10:
        raise ValueError("need at least 10 samples")
    phi = maire_phi()
    t1 = np.geomspace(t1_min, t1_max, count)
    t, xi = maire_path(t1, sign)
    val = np.abs(np.einsum("nk,nk->n", phi.eval(t), xi))
    grad = np.linalg.norm(np.einsum("nkj,nk->nj", phi.jacobian(t), xi), axis=-1)
    slope = float(np.polyfit(np.log(grad), np.log(val), 1)[0])
    theta = float(np.polyfit(np.log(val), np.log(grad), 1)[0])
    return MaireDiagnostic(t1, val, grad, slope, theta)


# -- full check ----------------------------------------------------------------------

def certify(phi: PolynomialMap, xi0, W0: Box, half_angle: float = 0.25, directions: int = 17,
            seed: int = 0, openness_directions: int = 5) -> StarCertificate | LojasiewiczFailure:
    """Openness on the cone, then the homogeneous shortcut or the grid estimate."""
    cone = Cone(np.asarray(xi0, dtype=float), half_angle)
    dirs = cone.sample(openness_directions, seed)
    openness = []
    for d in dirs:
        v = check_openness(phi, d, W0, seed=seed)
        openness.append({"xi": d.tolist(), **v.to_json()})
        if v.status == "NotOpen":
            return LojasiewiczFailure(math.nan, f"openness fails at xi={d.tolist()}: {v.witness_kind} "
                                      f"at t={v.witness}", [], openness)
    homogeneous = all(phi.dot(d).homogeneity().is_homogeneous and (phi.dot(d).homogeneity().degree or 0) >= 2
                      for d in cone.sample(directions, seed))
    result = None
    if homogeneous:
        try:
            result = homogeneous_star(phi, cone, W0, directions)
        except CertificateUnavailable:
            result = None
    if result is None:
        result = estimate_lojasiewicz(phi, cone, W0, directions=directions, seed=seed)
    result.openness = openness
    if isinstance(result, StarCertificate) and any(o["status"] == "Inconclusive" for o in openness):
        result.notes.append("openness inconclusive at the finest radius for some direction")
    return result
