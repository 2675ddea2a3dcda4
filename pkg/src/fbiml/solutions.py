"""Test inputs u(x, t) for the transforms.

Every input knows how to pair itself against a smooth kernel on one t-slice:
``pair(ts, t, kernel, breaks, order)`` returns  integral kernel(x') u(x', t) dx'
over the box spanned by ``breaks`` (one array of panel breakpoints per x-axis).
Smooth inputs use tensor Gauss-Legendre; gridded inputs use their own nodes;
boundary values of 1/(Z - w0) are paired analytically through the
Plemelj decomposition so the singular slice is handled exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .quadrature import bump, gauss_legendre, graded_breaks, tensor_rule, trapezoid_rule
from .tube import GridFunction, TubeStructure

Kernel = Callable[[np.ndarray], np.ndarray]


class Solution:
    """Base class: smooth inputs only need ``values``."""

    name = "abstract"

    def values(self, ts: TubeStructure, xp: np.ndarray, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def pair(self, ts: TubeStructure, t, kernel: Kernel, breaks: list[np.ndarray], order: int,
             rule: str = "gauss-legendre") -> complex:
        if rule == "trapezoid":
            rules = [trapezoid_rule(b[0], b[-1], (len(b) - 1) * order + 1) for b in breaks]
        else:
            rules = [gauss_legendre(b, order) for b in breaks]
        xp, w = tensor_rule(rules)
        return complex(np.sum(w * kernel(xp) * self.values(ts, xp, np.asarray(t, dtype=float))))

    def describe(self) -> dict:
        return {"type": self.name}


class ZeroSolution(Solution):
    name = "zero"

    def values(self, ts, xp, t):
        return np.zeros(len(xp), dtype=complex)

    def pair(self, ts, t, kernel, breaks, order, rule="gauss-legendre"):
        return 0j


@dataclass
class ExponentialSolution(Solution):
    """exp(i zeta.Z(x,t)) for a fixed complex frequency zeta."""

    zeta: np.ndarray
    name = "exponential"

    def __post_init__(self):
        self.zeta = np.atleast_1d(np.asarray(self.zeta, dtype=complex))

    def values(self, ts, xp, t):
        z = xp + 1j * ts.phi.eval(t)
        return np.exp(1j * (z @ self.zeta))

    def describe(self):
        return {"type": self.name, "zeta_re": self.zeta.real.tolist(), "zeta_im": self.zeta.imag.tolist()}


@dataclass
class BumpSolution(Solution):
    """A t-independent compactly supported bump, optionally modulated by cos(k x_1)."""

    radius: float = 1.0
    frequency: float = 0.0
    name = "bump"

    def values(self, ts, xp, t):
        out = bump(xp, self.radius).astype(complex)
        if self.frequency:
            out *= np.cos(self.frequency * xp[..., 0])
        return out

    def describe(self):
        return {"type": self.name, "radius": self.radius, "frequency": self.frequency}


@dataclass
class SuperpositionSolution(Solution):
    """sum_i w_i exp(i s_i omega.Z): a discretized integral of exponential solutions."""

    direction: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    name = "superposition"

    def __post_init__(self):
        self.direction = np.atleast_1d(np.asarray(self.direction, dtype=float))
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.weights = np.asarray(self.weights, dtype=complex)
        if self.nodes.shape != self.weights.shape:
            raise ValueError("superposition nodes and weights must have the same length")

    @classmethod
    def from_weight_function(cls, direction, weight: Callable[[np.ndarray], np.ndarray],
                             s_max: float, panels: int = 64, order: int = 16) -> "SuperpositionSolution":
        nodes, w = gauss_legendre(np.linspace(0.0, s_max, panels + 1), order)
        return cls(direction, nodes, w * weight(nodes))

    @classmethod
    def from_csv(cls, direction, path: str | Path) -> "SuperpositionSolution":
        """Weight file with columns ``s, weight``; trapezoid weights in s."""
        with open(path, newline="") as fh:
            rows = [(float(r[0]), float(r[1])) for r in csv.reader(fh) if r and not r[0].startswith("#")
                    and _is_number(r[0])]
        if len(rows) < 2:
            raise ValueError(f"weight file {path} needs at least two rows")
        s, wt = np.array(rows).T
        trap = np.zeros_like(s)
        ds = np.diff(s)
        trap[:-1] += ds / 2
        trap[1:] += ds / 2
        return cls(direction, s, trap * wt)

    def values(self, ts, xp, t):
        z = xp + 1j * ts.phi.eval(t)
        proj = z @ self.direction
        return np.exp(1j * proj[:, None] * self.nodes[None, :]) @ self.weights

    def describe(self):
        return {"type": self.name, "direction": self.direction.tolist(), "terms": int(self.nodes.size)}


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


@dataclass
class BoundaryValueSolution(Solution):
    """c / (Z(x,t) - w0) for m = 1, taken as a boundary value where it is singular.

    On a slice where Im w0 = phi(t) the pole sits on the real x-axis; the
    distribution is the limit from the side ``side`` (+1: x + i0, -1: x - i0).
    When ``side`` is None it is read off from the sign of phi - Im w0 over W.
    """

    w0: complex
    c: complex = 1.0
    side: int | None = None
    name = "boundary_value"

    def _check(self, ts):
        if ts.m != 1:
            raise ValueError("boundary-value family is implemented for m = 1")

    def _offset(self, ts, t) -> float:
        return float(ts.phi.eval(np.asarray(t, dtype=float))[0] - np.imag(self.w0))

    def resolved_side(self, ts: TubeStructure) -> int:
        if self.side is not None:
            return 1 if self.side >= 0 else -1
        probe = ts.W.grid_points(9)
        mean = float(np.mean(ts.phi.eval(probe)[:, 0] - np.imag(self.w0)))
        return -1 if mean < 0 else 1

    def values(self, ts, xp, t):
        self._check(ts)
        return self.c / (xp[..., 0] + 1j * ts.phi.eval(np.asarray(t, dtype=float))[0] - self.w0)

    def pair(self, ts, t, kernel, breaks, order, rule="gauss-legendre"):
        self._check(ts)
        lo, hi = float(breaks[0][0]), float(breaks[0][-1])
        a = float(np.real(self.w0))
        eps = self._offset(ts, t)
        s = self.resolved_side(ts)
        scale = max(hi - lo, 1e-300)
        npan = max(len(breaks[0]) - 1, 1) / scale

        def f(y):
            return kernel(np.asarray(y, dtype=float)[:, None])

        if lo < a < hi:
            hmin = max(abs(eps) * 1e-2, 1e-13 * scale)
            nodes, w = gauss_legendre(graded_breaks(lo, hi, a, hmin, panels_per_unit=npan), order)
            fa = f(np.array([a]))[0]
            body = np.sum(w * (f(nodes) - fa) / (nodes - a + 1j * eps))
            if eps == 0.0:
                ends = np.log((hi - a) / (a - lo)) - 1j * np.pi * s
            else:
                ends = np.log(hi - a + 1j * eps) - np.log(lo - a + 1j * eps)
            return complex(self.c * (body + fa * ends))
        # pole outside the integration window: integrand is smooth, grade toward the near end
        near = min(max(a, lo), hi)
        hmin = max(abs(eps) * 1e-2, abs(a - near) * 1e-2, 1e-13 * scale)
        nodes, w = gauss_legendre(graded_breaks(lo, hi, near, hmin, panels_per_unit=npan), order)
        return complex(self.c * np.sum(w * f(nodes) / (nodes - a + 1j * eps)))

    def describe(self):
        return {"type": self.name, "w0": [float(np.real(self.w0)), float(np.imag(self.w0))],
                "c": [float(np.real(self.c)), float(np.imag(self.c))], "side": self.side}


@dataclass
class GridSolution(Solution):
    """Samples on a product grid; pairing is the trapezoid rule on the grid nodes."""

    u: GridFunction
    name = "grid"

    def values(self, ts, xp, t):
        raise TypeError("grid samples cannot be evaluated off the grid")

    def slice(self, t):
        return self.u.t_slice(t)

    def pair(self, ts, t, kernel, breaks, order, rule="gauss-legendre"):
        xs, vals = self.u.t_slice(t)
        lo = np.array([b[0] for b in breaks])
        hi = np.array([b[-1] for b in breaks])
        keep = np.all((xs >= lo) & (xs <= hi), axis=-1)
        if not np.any(keep):
            return 0j
        cell = float(np.prod(self.u.grid.spacings[: xs.shape[1]]))
        return complex(cell * np.sum(kernel(xs[keep]) * vals[keep]))

    @property
    def spacing(self) -> float:
        m = len(self.u.grid.x_axes)
        return max(self.u.grid.spacings[:m])

    def describe(self):
        return {"type": self.name, "shape": list(self.u.grid.shape), "mollified": self.u.mollified}
