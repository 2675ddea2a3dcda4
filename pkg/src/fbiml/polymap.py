"""Sparse multivariate polynomial maps phi: R^n -> R^m.

Each component is a list of ``(exponent multi-index, coefficient)`` terms.
Terms are merged on construction and kept in graded lexicographic order, so
every evaluation sums monomials in the same order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

Term = tuple[tuple[int, ...], float]


def _grlex_key(exponent: tuple[int, ...]) -> tuple:
    return (sum(exponent), exponent)


def _normalize(terms: Iterable[Sequence], n: int) -> tuple[Term, ...]:
    merged: dict[tuple[int, ...], float] = {}
    for exponent, coef in terms:
        exponent = tuple(int(e) for e in exponent)
        if len(exponent) != n:
            raise ValueError(f"exponent {exponent} has length {len(exponent)}, expected {n}")
        if any(e < 0 for e in exponent):
            raise ValueError(f"negative exponent in {exponent}")
        coef = float(coef)
        if not math.isfinite(coef):
            raise ValueError(f"non-finite coefficient {coef!r}")
        merged[exponent] = merged.get(exponent, 0.0) + coef
    kept = [(e, c) for e, c in merged.items() if c != 0.0]
    return tuple(sorted(kept, key=lambda ec: _grlex_key(ec[0])))


@dataclass(frozen=True)
class HomogeneityReport:
    per_component: tuple[bool, ...]
    is_homogeneous: bool
    degree: int | None  # None for the zero map or when not jointly homogeneous


@dataclass(frozen=True, init=False)
class PolynomialMap:
    n: int
    components: tuple[tuple[Term, ...], ...]

    def __init__(self, n: int, components: Sequence[Iterable[Sequence]]):
        if n < 1:
            raise ValueError("input dimension n must be positive")
        comps = tuple(_normalize(c, n) for c in components)
        if not comps:
            raise ValueError("a polynomial map needs at least one component")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "components", comps)

    @property
    def m(self) -> int:
        return len(self.components)

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_json(cls, n: int, phi: Sequence) -> "PolynomialMap":
        """Build from ``[[[exps...], coef], ...]`` per component."""
        return cls(n, [[(tuple(e), c) for e, c in comp] for comp in phi])

    def to_json(self) -> list:
        return [[[list(e), c] for e, c in comp] for comp in self.components]

    def dot(self, xi: Sequence[float]) -> "PolynomialMap":
        """The scalar polynomial t -> phi(t).xi."""
        xi = np.asarray(xi, dtype=float)
        if xi.shape != (self.m,):
            raise ValueError(f"xi must have shape ({self.m},), got {xi.shape}")
        terms = [(e, c * float(x)) for comp, x in zip(self.components, xi) for e, c in comp]
        return PolynomialMap(self.n, [terms])

    def scaled(self, factor: float) -> "PolynomialMap":
        return PolynomialMap(self.n, [[(e, c * factor) for e, c in comp] for comp in self.components])

    def derivative(self, j: int) -> "PolynomialMap":
        """Exact partial derivative with respect to t_j (0-based)."""
        if not 0 <= j < self.n:
            raise IndexError(f"variable index {j} out of range for n={self.n}")
        comps = []
        for comp in self.components:
            terms = []
            for e, c in comp:
                if e[j] > 0:
                    d = list(e)
                    d[j] -= 1
                    terms.append((tuple(d), c * e[j]))
            comps.append(terms)
        return PolynomialMap(self.n, comps)

    @property
    def has_zero_constant(self) -> bool:
        zero = (0,) * self.n
        return all(e != zero for comp in self.components for e, _ in comp)

    # -- evaluation -----------------------------------------------------------

    @cached_property
    def _arrays(self) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
        out = []
        for comp in self.components:
            if comp:
                exps = np.array([e for e, _ in comp], dtype=int)
                coefs = np.array([c for _, c in comp], dtype=float)
            else:
                exps = np.zeros((0, self.n), dtype=int)
                coefs = np.zeros(0)
            out.append((exps, coefs))
        return tuple(out)

    def _check_points(self, t) -> np.ndarray:
        t = np.asarray(t)
        if t.shape[-1:] != (self.n,):
            raise ValueError(f"points must have trailing dimension {self.n}, got shape {t.shape}")
        return t

    def __call__(self, t) -> np.ndarray:
        return self.eval(t)

    def eval(self, t) -> np.ndarray:
        """Evaluate at one point (shape (n,)) or a stack of points (shape (..., n))."""
        t = self._check_points(t)
        out = np.empty(t.shape[:-1] + (self.m,), dtype=np.result_type(t, float))
        for k, (exps, coefs) in enumerate(self._arrays):
            if coefs.size == 0:
                out[..., k] = 0.0
                continue
            monomials = np.prod(t[..., None, :] ** exps, axis=-1)
            out[..., k] = monomials @ coefs
        return out

    @cached_property
    def _jacobian_maps(self) -> tuple["PolynomialMap", ...]:
        return tuple(self.derivative(j) for j in range(self.n))

    @cached_property
    def _hessian_maps(self) -> tuple[tuple["PolynomialMap", ...], ...]:
        return tuple(tuple(d.derivative(i) for i in range(self.n)) for d in self._jacobian_maps)

    def jacobian(self, t) -> np.ndarray:
        """d phi(t), shape (..., m, n)."""
        t = self._check_points(t)
        return np.stack([d.eval(t) for d in self._jacobian_maps], axis=-1)

    def hessians(self, t) -> np.ndarray:
        """Second derivatives, shape (..., m, n, n)."""
        t = self._check_points(t)
        rows = [np.stack([h.eval(t) for h in row], axis=-1) for row in self._hessian_maps]
        return np.stack(rows, axis=-2)

    def grad_transpose_apply(self, t, xi) -> np.ndarray:
        """Return ``t(d phi(t)) xi``, the t-gradient of phi(t).xi."""
        xi = np.asarray(xi)
        if xi.shape[-1:] != (self.m,):
            raise ValueError(f"xi must have trailing dimension {self.m}, got shape {xi.shape}")
        jac = self.jacobian(t)
        return np.einsum("...kj,...k->...j", jac, xi)

    def pairing(self, t, xi) -> np.ndarray:
        """phi(t).xi, broadcasting over leading axes."""
        return np.einsum("...k,...k->...", self.eval(t), np.asarray(xi))

    # -- structure ------------------------------------------------------------

    def degrees(self) -> list[set[int]]:
        return [{sum(e) for e, _ in comp} for comp in self.components]

    def homogeneity(self) -> HomogeneityReport:
        degs = self.degrees()
        per = tuple(len(d) <= 1 for d in degs)
        nonzero = set().union(*degs)
        joint = all(per) and len(nonzero) <= 1
        degree = next(iter(nonzero)) if joint and nonzero else None
        return HomogeneityReport(per_component=per, is_homogeneous=joint, degree=degree)

    def total_degree(self) -> int:
        return max((max(d) for d in self.degrees() if d), default=0)


def monomial(exponent: Sequence[int], coef: float = 1.0) -> Term:
    return (tuple(exponent), float(coef))
