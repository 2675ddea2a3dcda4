import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from fbiml.polymap import PolynomialMap
from fbiml.quadrature import Cutoff, bump, gauss_legendre, graded_breaks, tensor_rule, trapezoid_rule
from fbiml.solutions import BoundaryValueSolution, SuperpositionSolution
from fbiml.tube import Box, TubeStructure

PARABOLA = TubeStructure(PolynomialMap(1, [[((2,), 1.0)]]), Box((6.0,)), Box((1.0,)))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 31), st.floats(-3, 0), st.floats(0.1, 3))
def test_gauss_legendre_exact_for_polynomials(k, lo, width):
    hi = lo + width
    x, w = gauss_legendre(np.linspace(lo, hi, 3), 8)  # exact through degree 15 per panel
    k = k % 16
    assert np.sum(w * x ** k) == pytest.approx((hi ** (k + 1) - lo ** (k + 1)) / (k + 1), rel=1e-10, abs=1e-12)


def test_tensor_and_trapezoid():
    r = trapezoid_rule(0.0, 1.0, 11)
    assert np.sum(r[1]) == pytest.approx(1.0)
    pts, w = tensor_rule([gauss_legendre([0, 1], 4), gauss_legendre([0, 2], 4)])
    assert pts.shape == (16, 2)
    assert np.sum(w * pts[:, 0] * pts[:, 1] ** 2) == pytest.approx(0.5 * 8 / 3)


def test_graded_breaks_refine_toward_center():
    b = graded_breaks(-1.0, 1.0, 0.2, 1e-6)
    assert b[0] == -1.0 and b[-1] == 1.0 and np.all(np.diff(b) > 0)
    assert 0.2 in b
    assert np.min(np.diff(b)) < 2e-6


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 2.0), st.floats(0.05, 2.0), st.floats(-5, 5))
def test_cutoff_properties(inner, gap, x):
    chi = Cutoff(inner, inner + gap)
    v = float(chi(np.array([x])))
    assert 0.0 <= v <= 1.0
    if abs(x) <= inner:
        assert v == 1.0
    if abs(x) >= inner + gap:
        assert v == 0.0


def test_cutoff_monotone_and_invalid():
    r = np.linspace(0, 2, 2001)[:, None]
    v = Cutoff(0.5, 1.5)(r)
    assert np.all(np.diff(v) <= 1e-15)
    assert v[1000] == pytest.approx(0.5)  # psi ratio is symmetric about the midpoint
    with pytest.raises(ValueError):
        Cutoff(1.0, 1.0)


def test_bump_peak_and_support():
    assert bump(np.zeros((1, 2)))[0] == 1.0
    assert bump(np.array([[1.0]]))[0] == 0.0


def _gauss_kernel(y):
    return np.exp(-y[:, 0] ** 2)


def test_boundary_value_on_pole_slice():
    # 1/(x + i0) = pv 1/x - i pi delta, paired with an even Gaussian
    u = BoundaryValueSolution(0.0, side=1)
    val = u.pair(PARABOLA, [0.0], _gauss_kernel, [np.linspace(-6, 6, 25)], 16)
    assert val == pytest.approx(-1j * np.pi, abs=1e-10)
    minus = BoundaryValueSolution(0.0, side=-1).pair(PARABOLA, [0.0], _gauss_kernel, [np.linspace(-6, 6, 25)], 16)
    assert minus == pytest.approx(1j * np.pi, abs=1e-10)


@pytest.mark.parametrize("t,a", [(0.3, 0.0), (0.1, 0.4), (0.5, -7.0)])
def test_boundary_value_off_pole_vs_quad(t, a):
    eps = t * t
    f = lambda y, part: part(np.exp(-(y - 0.2) ** 2) / (y - a + 1j * eps))  # noqa: E731
    ref = sum(quad(f, -6, 6, args=(p,), points=[a] if -6 < a < 6 else None, limit=400)[0] * k
              for p, k in ((np.real, 1), (np.imag, 1j)))
    u = BoundaryValueSolution(complex(a, 0.0))
    val = u.pair(PARABOLA, [t], lambda y: np.exp(-(y[:, 0] - 0.2) ** 2), [np.linspace(-6, 6, 25)], 16)
    assert val == pytest.approx(ref, rel=1e-8, abs=1e-10)


def test_superposition_from_csv(tmp_path):
    # int_0^inf e^{-s} e^{i s Z} ds = i / (Z + i)
    s = np.linspace(0, 40, 8001)
    path = tmp_path / "w.csv"
    path.write_text("s,weight\n" + "\n".join(f"{a:.12e},{np.exp(-a):.12e}" for a in s))
    u = SuperpositionSolution.from_csv([1.0], path)
    xp = np.array([[0.3], [-0.7]])
    z = xp[:, 0] + 1j * 0.25
    np.testing.assert_allclose(u.values(PARABOLA, xp, np.array([0.5])), 1j / (z + 1j), rtol=1e-5)


def test_superposition_csv_errors(tmp_path):
    p = tmp_path / "short.csv"
    p.write_text("0,1\n")
    with pytest.raises(ValueError):
        SuperpositionSolution.from_csv([1.0], p)
    with pytest.raises(ValueError):
        SuperpositionSolution([1.0], [0.0, 1.0], [1.0])
