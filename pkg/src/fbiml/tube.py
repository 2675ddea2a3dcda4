"""Tube structures: first integrals Z(x,t) = x + i phi(t) and their vector fields.

For a tube structure the fields are

    L_j = d/dt_j - i sum_k (d phi_k / d t_j)(t) d/dx_k,

and M_k = d/dx_k, so that L_j Z_k = 0 and det Z_x = 1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .polymap import PolynomialMap


@dataclass(frozen=True)
class Box:
    """Closed centered box prod_i [-h_i, h_i]."""

    half_widths: tuple[float, ...]

    def __post_init__(self):
        hw = tuple(float(h) for h in np.atleast_1d(self.half_widths))
        if not hw or any(not h > 0 for h in hw):
            raise ValueError(f"box half-widths must be positive, got {hw}")
        object.__setattr__(self, "half_widths", hw)

    @classmethod
    def cube(cls, half_width: float, dim: int) -> "Box":
        return cls((float(half_width),) * dim)

    @property
    def dim(self) -> int:
        return len(self.half_widths)

    @property
    def hw(self) -> np.ndarray:
        return np.array(self.half_widths)

    @property
    def inradius(self) -> float:
        return min(self.half_widths)

    def scaled(self, factor: float) -> "Box":
        return Box(tuple(h * factor for h in self.half_widths))

    def contains(self, p, strict: bool = False) -> np.ndarray:
        p = np.abs(np.asarray(p, dtype=float))
        return np.all(p < self.hw, axis=-1) if strict else np.all(p <= self.hw, axis=-1)

    def distance_to_boundary(self, p) -> np.ndarray:
        return np.min(self.hw - np.abs(np.asarray(p, dtype=float)), axis=-1)

    def axes(self, nodes: int | Sequence[int]) -> list[np.ndarray]:
        nodes = np.broadcast_to(np.asarray(nodes), (self.dim,))
        return [np.linspace(-h, h, int(k)) for h, k in zip(self.half_widths, nodes)]

    def grid_points(self, nodes: int | Sequence[int]) -> np.ndarray:
        """All nodes of the uniform product grid, shape (N, dim)."""
        mesh = np.meshgrid(*self.axes(nodes), indexing="ij")
        return np.stack([a.ravel() for a in mesh], axis=-1)

    def corners(self) -> np.ndarray:
        signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * self.dim, indexing="ij")).reshape(self.dim, -1).T
        return signs * self.hw


@dataclass(frozen=True)
class TubeStructure:
    phi: PolynomialMap
    V: Box
    W: Box

    def __post_init__(self):
        if not self.phi.has_zero_constant:
            raise ValueError("phi(0) must vanish: constant terms are not allowed")
        if self.V.dim != self.m:
            raise ValueError(f"V has dimension {self.V.dim}, expected m={self.m}")
        if self.W.dim != self.n:
            raise ValueError(f"W has dimension {self.W.dim}, expected n={self.n}")

    @property
    def m(self) -> int:
        return self.phi.m

    @property
    def n(self) -> int:
        return self.phi.n

    @classmethod
    def from_json(cls, doc: dict) -> "TubeStructure":
        m, n = int(doc["m"]), int(doc["n"])
        phi = PolynomialMap.from_json(n, doc["phi"])
        if phi.m != m:
            raise ValueError(f"phi has {phi.m} components but m={m}")
        return cls(phi, Box(tuple(np.broadcast_to(doc["V"], (m,)))), Box(tuple(np.broadcast_to(doc["W"], (n,)))))

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.n, "phi": self.phi.to_json(),
                "V": list(self.V.half_widths), "W": list(self.W.half_widths)}


def first_integral(ts: TubeStructure, x, t) -> np.ndarray:
    """Z(x,t) = x + i phi(t), broadcasting over leading axes."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if x.shape[-1:] != (ts.m,) or t.shape[-1:] != (ts.n,):
        raise ValueError(f"expected x in R^{ts.m} and t in R^{ts.n}, got shapes {x.shape}, {t.shape}")
    if not (np.all(ts.V.contains(x)) and np.all(ts.W.contains(t))):
        warnings.warn("first_integral evaluated outside V x W", stacklevel=2)
    return x + 1j * ts.phi.eval(t)


@dataclass(frozen=True)
class Grid:
    """Uniform product grid over V x W; array axes are (x_1..x_m, t_1..t_n)."""

    x_axes: tuple[np.ndarray, ...]
    t_axes: tuple[np.ndarray, ...]

    @classmethod
    def over(cls, ts: TubeStructure, x_nodes, t_nodes) -> "Grid":
        return cls(tuple(ts.V.axes(x_nodes)), tuple(ts.W.axes(t_nodes)))

    @property
    def axes(self) -> tuple[np.ndarray, ...]:
        return self.x_axes + self.t_axes

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.axes)

    @property
    def spacings(self) -> tuple[float, ...]:
        return tuple(float(a[1] - a[0]) if len(a) > 1 else 0.0 for a in self.axes)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Stacked coordinates: x of shape (*shape, m) and t of shape (*shape, n)."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        m = len(self.x_axes)
        x = np.stack(mesh[:m], axis=-1)
        t = np.stack(mesh[m:], axis=-1)
        return x, t


@dataclass(frozen=True)
class GridFunction:
    grid: Grid
    values: np.ndarray
    mollified: bool = False  # True when samples stand in for a distribution

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(f"sample shape {self.values.shape} does not match grid {self.grid.shape}")
        if any(h <= 0 for h in self.grid.spacings):
            raise ValueError("grid spacings must be positive")

    def t_slice(self, t) -> tuple[np.ndarray, np.ndarray]:
        """Samples on the x-grid at the t-node nearest to ``t``: (x points (N,m), values (N,))."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        idx = tuple(int(np.argmin(np.abs(ax - tj))) for ax, tj in zip(self.grid.t_axes, t))
        node = np.array([ax[i] for ax, i in zip(self.grid.t_axes, idx)])
        if not np.allclose(node, t, atol=1e-12):
            warnings.warn(f"t={t} is not a grid node; using nearest node {node}", stacklevel=2)
        vals = self.values[(Ellipsis,) + idx]
        mesh = np.meshgrid(*self.grid.x_axes, indexing="ij")
        xs = np.stack([a.ravel() for a in mesh], axis=-1)
        return xs, vals.ravel()


@dataclass(frozen=True)
class Covector:
    x: np.ndarray
    t: np.ndarray
    xi: np.ndarray
    eta: np.ndarray = field(default=None)

    def __post_init__(self):
        xi = np.atleast_1d(np.asarray(self.xi, dtype=float))
        eta = np.zeros(np.atleast_1d(self.t).shape) if self.eta is None else np.atleast_1d(np.asarray(self.eta, dtype=float))
        if not (np.any(xi) or np.any(eta)):
            raise ValueError("covector (xi, eta) must be nonzero")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "x", np.atleast_1d(np.asarray(self.x, dtype=float)))
        object.__setattr__(self, "t", np.atleast_1d(np.asarray(self.t, dtype=float)))


def apply_L(ts: TubeStructure, j: int, u: GridFunction) -> GridFunction:
    """Discrete L_j u (j is 1-based) on the interior grid.

    Derivatives are second-order central differences; the returned samples
    exclude every boundary node.
    """
    if not 1 <= j <= ts.n:
        raise IndexError(f"field index {j} out of range 1..{ts.n}")
    if min(u.grid.shape) < 3:
        raise ValueError("apply_L needs at least 3 nodes per axis")
    m = ts.m
    h = u.grid.spacings
    dt = np.gradient(u.values, h[m + j - 1], axis=m + j - 1)
    _, tmesh = u.grid.mesh()
    dphi = ts.phi.jacobian(tmesh)[..., :, j - 1]  # (..., m): d phi_k / d t_j
    out = dt.astype(complex)
    for k in range(m):
        out = out - 1j * dphi[..., k] * np.gradient(u.values, h[k], axis=k)
    interior = tuple(slice(1, -1) for _ in u.grid.shape)
    grid = Grid(tuple(a[1:-1] for a in u.grid.x_axes), tuple(a[1:-1] for a in u.grid.t_axes))
    return GridFunction(grid, out[interior], mollified=u.mollified)


def sample(ts: TubeStructure, grid: Grid, fn) -> GridFunction:
    """Samples of ``fn(Z, x, t)`` on the grid."""
    x, t = grid.mesh()
    z = x + 1j * ts.phi.eval(t)
    return GridFunction(grid, np.asarray(fn(z, x, t), dtype=complex))


def exponential_solution(ts: TubeStructure, zeta, grid: Grid) -> GridFunction:
    """Samples of exp(i zeta.Z(x,t)), an exact solution of L_j u = 0."""
    zeta = np.asarray(zeta, dtype=complex).reshape(ts.m)
    return sample(ts, grid, lambda z, x, t: np.exp(1j * (z @ zeta)))


def char_directions(ts: TubeStructure, x, t, xi, eta=None, tol: float = 1e-12) -> bool:
    """Whether (x, t, xi, eta) lies in the characteristic set.

    The test is eta == 0 together with ||t(d phi(t)) xi|| <= tol * ||xi||.
    """
    cv = Covector(x, t, xi, eta)
    if np.any(cv.eta != 0):
        return False
    g = ts.phi.grad_transpose_apply(cv.t, cv.xi)
    return bool(np.linalg.norm(g) <= tol * np.linalg.norm(cv.xi))
