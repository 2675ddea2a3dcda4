"""Quadrature rules and smooth cutoffs shared by the transform code."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def _legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def gauss_legendre(breaks, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights over consecutive panels ``breaks``."""
    breaks = np.asarray(breaks, dtype=float)
    x0, w0 = _legendre(order)
    a, b = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) * 0.5 + half * x0
    weights = half * w0
    return nodes.ravel(), weights.ravel()


def uniform_breaks(lo: float, hi: float, panels: int) -> np.ndarray:
    return np.linspace(lo, hi, max(int(panels), 1) + 1)


def graded_breaks(lo: float, hi: float, center: float, hmin: float, ratio: float = 0.5,
                  panels_per_unit: float = 4.0) -> np.ndarray:
    """Breakpoints on [lo, hi] refined geometrically toward ``center``.

    Panels adjacent to ``center`` shrink by ``ratio`` down to width ``hmin``;
    the far field is split uniformly at ``panels_per_unit`` panels per unit.
    """
    pts = {lo, hi}
    if lo < center < hi:
        pts.add(center)
    for side, limit in ((-1.0, lo), (1.0, hi)):
        span = abs(limit - center)
        if span <= 0 or not (lo <= center <= hi):
            continue
        w = span * ratio
        while w > hmin:
            p = center + side * w
            if lo < p < hi:
                pts.add(p)
            w *= ratio
    out = np.array(sorted(pts))
    # subdivide long panels
    fine = [out[0]]
    for a, b in zip(out[:-1], out[1:]):
        k = max(1, int(np.ceil((b - a) * panels_per_unit)))
        fine.extend(np.linspace(a, b, k + 1)[1:])
    return np.array(fine)


def trapezoid_rule(lo: float, hi: float, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.linspace(lo, hi, max(int(nodes), 2))
    w = np.full_like(x, x[1] - x[0])
    w[[0, -1]] *= 0.5
    return x, w


def tensor_rule(rules: list[tuple[np.ndarray, np.ndarray]]) -> tuple[np.ndarray, np.ndarray]:
    """Product of 1-D rules: nodes (N, d), weights (N,)."""
    nodes = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    weights = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    pts = np.stack([a.ravel() for a in nodes], axis=-1)
    w = np.prod(np.stack([a.ravel() for a in weights], axis=-1), axis=-1)
    return pts, w


def _psi(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


@dataclass(frozen=True)
class Cutoff:
    """Radial C-infinity cutoff: 1 on |x| <= inner, 0 on |x| >= outer."""

    inner: float
    outer: float

    def __post_init__(self):
        if not 0 < self.inner < self.outer:
            raise ValueError(f"cutoff radii must satisfy 0 < inner < outer, got {self.inner}, {self.outer}")

    def __call__(self, x) -> np.ndarray:
        r = np.linalg.norm(np.atleast_1d(np.asarray(x, dtype=float)), axis=-1)
        s = np.clip((r - self.inner) / (self.outer - self.inner), 0.0, 1.0)
        a, b = _psi(1.0 - s), _psi(s)
        return a / (a + b)


def bump(x, radius: float = 1.0) -> np.ndarray:
    """exp(1 - 1/(1 - |x/radius|^2)) inside the ball, 0 outside; peak value 1."""
    r2 = np.sum((np.atleast_1d(np.asarray(x, dtype=float)) / radius) ** 2, axis=-1)
    out = np.zeros_like(r2)
    inside = r2 < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
    return out
