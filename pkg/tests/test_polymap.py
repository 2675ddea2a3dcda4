import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import polymaps
from fbiml.polymap import PolynomialMap


def maire_plus():
    # (3 t1, (t1 t2 + 1) t1^3)
    return PolynomialMap(2, [[((1, 0), 3.0)], [((4, 1), 1.0), ((3, 0), 1.0)]])


def test_eval_examples():
    assert PolynomialMap(2, [[((2, 0), 1.0), ((0, 2), -1.0)]]).eval(np.zeros(2)).tolist() == [0.0]
    assert maire_plus().eval(np.array([1.0, 1.0])).tolist() == [3.0, 2.0]
    assert PolynomialMap(1, [[((3,), 1.0)]]).eval(np.array([2.0])).tolist() == [8.0]


def test_eval_dimension_mismatch():
    with pytest.raises(ValueError):
        PolynomialMap(2, [[((2, 0), 1.0)]]).eval(np.zeros(3))


def test_construction_validates_exponents():
    with pytest.raises(ValueError):
        PolynomialMap(2, [[((2,), 1.0)]])
    with pytest.raises(ValueError):
        PolynomialMap(1, [[((1,), float("nan"))]])


def test_grad_transpose_examples():
    p = PolynomialMap(2, [[((2, 0), 1.0), ((0, 2), -1.0)]])
    assert p.grad_transpose_apply(np.array([1.0, 2.0]), np.array([1.0])).tolist() == [2.0, -4.0]
    t1, x1, x2 = 0.7, 0.3, -1.1
    g = maire_plus().grad_transpose_apply(np.array([t1, 0.0]), np.array([x1, x2]))
    np.testing.assert_allclose(g, [3 * x1 + 3 * t1 ** 2 * x2, t1 ** 4 * x2], rtol=1e-14)
    assert np.all(maire_plus().grad_transpose_apply(np.array([0.4, 0.2]), np.zeros(2)) == 0)


def test_gradient_norm_matches_maire_formula():
    # stored with phi_1 = -3 t1: ||t(d phi) xi||^2 = t1^8 xi2^2 + (-3 xi1 + t1^2 xi2 (3 + 4 t1 t2))^2
    p = PolynomialMap(2, [[((1, 0), -3.0)], [((4, 1), 1.0), ((3, 0), 1.0)]])
    r = np.random.default_rng(1)
    for _ in range(20):
        t = r.uniform(-1, 1, 2)
        xi = r.normal(size=2)
        lhs = np.sum(p.grad_transpose_apply(t, xi) ** 2)
        rhs = t[0] ** 8 * xi[1] ** 2 + (-3 * xi[0] + t[0] ** 2 * xi[1] * (3 + 4 * t[0] * t[1])) ** 2
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_homogeneity_examples():
    h = PolynomialMap(2, [[((2, 0), 1.0), ((0, 2), -1.0)], [((1, 1), 1.0)]]).homogeneity()
    assert h.is_homogeneous and h.degree == 2
    assert not maire_plus().homogeneity().is_homogeneous
    h = PolynomialMap(1, [[((3,), 1.0)]]).homogeneity()
    assert h.is_homogeneous and h.degree == 3


def test_zero_component_is_compatible_with_any_degree():
    h = PolynomialMap(1, [[((3,), 1.0)], []]).homogeneity()
    assert h.is_homogeneous and h.degree == 3


def test_duplicates_merge():
    a = PolynomialMap(2, [[((1, 1), 1.0), ((1, 1), 2.0), ((2, 0), 1.0), ((2, 0), -1.0)]])
    assert a.components == ((((1, 1), 3.0),),)


def test_json_round_trip():
    p = maire_plus()
    assert PolynomialMap.from_json(2, p.to_json()) == p


@settings(max_examples=60, deadline=None)
@given(polymaps(max_degree=6), st.integers(0, 2 ** 31 - 1))
def test_gradient_matches_central_differences(p, seed):
    r = np.random.default_rng(seed)
    t = r.uniform(-1, 1, p.n)
    xi = r.normal(size=p.m)
    h = 1e-4
    fd = np.array([(p.pairing(t + h * e, xi) - p.pairing(t - h * e, xi)) / (2 * h) for e in np.eye(p.n)])
    g = p.grad_transpose_apply(t, xi)
    scale = max(np.linalg.norm(g), 1.0)
    assert np.linalg.norm(fd - g) / scale < 1e-6


@settings(max_examples=60, deadline=None)
@given(polymaps(), st.integers(0, 2 ** 31 - 1), st.floats(-3, 3, allow_nan=False))
def test_eval_is_linear_in_coefficients(p, seed, a):
    t = np.random.default_rng(seed).uniform(-1, 1, p.n)
    np.testing.assert_allclose(p.scaled(a).eval(t), a * p.eval(t), rtol=1e-12, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(polymaps(), st.integers(0, 2 ** 31 - 1))
def test_merged_equals_unmerged(p, seed):
    t = np.random.default_rng(seed).uniform(-1, 1, p.n)
    split = PolynomialMap(p.n, [[(e, 0.5 * c) for e, c in comp] * 2 for comp in p.components])
    np.testing.assert_allclose(split.eval(t), p.eval(t), rtol=1e-12, atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2 ** 31 - 1), st.sampled_from([2.0, 3.0]))
def test_homogeneous_scaling(k, seed, lam):
    r = np.random.default_rng(seed)
    n = 2
    terms = [((i, k - i), float(r.normal())) for i in range(k + 1)]
    p = PolynomialMap(n, [terms])
    rep = p.homogeneity()
    assert rep.is_homogeneous and rep.degree == k
    t = r.uniform(-1, 1, n)
    np.testing.assert_allclose(p.eval(lam * t), lam ** k * p.eval(t), rtol=1e-12, atol=1e-12)
