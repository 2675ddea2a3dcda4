"""Built-in tube structures used by the command line and the tests."""

from __future__ import annotations

from dataclasses import dataclass

from .polymap import PolynomialMap
from .tube import Box, TubeStructure


@dataclass(frozen=True)
class Example:
    name: str
    structure: TubeStructure
    xi0: tuple[float, ...]
    summary: str


def _ts(n: int, comps, V, W) -> TubeStructure:
    return TubeStructure(PolynomialMap(n, comps), Box(tuple(V)), Box(tuple(W)))


def _build() -> dict[str, Example]:
    ex = [
        Example("maire", _ts(2, [[((1, 0), -3.0)], [((3, 0), 1.0), ((4, 1), 1.0)]], (1.0, 1.0), (0.5, 0.5)),
                (0.0, 1.0), "phi = (-3 t1, t1^3 + t1^4 t2): open but no Lojasiewicz exponent below 1"),
        Example("cubic", _ts(1, [[((3,), 1.0)]], (1.0,), (1.0,)), (1.0,),
                "phi = t^3: homogeneous, theta = 2/3"),
        Example("radial", _ts(2, [[((2, 0), -1.0), ((0, 2), -1.0)]], (1.0,), (1.0, 1.0)), (1.0,),
                "phi = -|t|^2: radial escape flows, not open at the origin"),
        Example("cone-pair", _ts(2, [[((2, 0), 1.0), ((0, 2), -1.0)], [((1, 1), 1.0)]], (1.0, 1.0), (1.0, 1.0)),
                (1.0, 0.0), "phi = (t1^2 - t2^2, t1 t2): two-component cone criterion"),
        Example("parabola", _ts(1, [[((2,), 1.0)]], (2.0,), (1.0,)), (1.0,),
                "phi = t^2: local minimum at the origin, not open"),
        Example("neg-parabola", _ts(1, [[((2,), -1.0)]], (2.0,), (1.0,)), (1.0,),
                "phi = -t^2: decreasing flows escape to the boundary"),
    ]
    return {e.name: e for e in ex}


EXAMPLES = _build()


def get(name: str) -> Example:
    try:
        return EXAMPLES[name]
    except KeyError:
        raise KeyError(f"unknown example {name!r}; choose from {', '.join(sorted(EXAMPLES))}") from None
