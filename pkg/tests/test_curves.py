import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fbiml.curves import (FlowArc, Segment, build_gamma, decrease_constant, flow_monotone, integrate_flow,
                          kappa_window, power_inequalities_hold, lemma_constant, length_bound, lipschitz_constant,
                          semigroup_defect, verify_decrease, verify_prop_properties, xi_threshold, g_function,
                          OdeSpec)
from fbiml.polymap import PolynomialMap
from fbiml.star import homogeneous_certificate
from fbiml.tube import Box

RADIAL = PolynomialMap(2, [[((2, 0), -1.0), ((0, 2), -1.0)]])
CUBE = PolynomialMap(1, [[((3,), 1.0)]])
NEG_SQ = PolynomialMap(1, [[((2,), -1.0)]])
I1 = Box((1.0,))


def test_flow_radial_escape():
    arc = integrate_flow(RADIAL, [1.0], [1.0, 0.0], Box((3.0, 3.0)))
    assert arc.cause == "Boundary"
    assert arc.delta1 == pytest.approx(2.0, abs=1e-9)
    np.testing.assert_allclose(arc.ell, [3.0, 0.0], atol=1e-9)
    np.testing.assert_allclose(arc.at([0.5, 1.5]), [[1.5, 0.0], [2.5, 0.0]], atol=1e-8)


def test_flow_linear():
    lin = PolynomialMap(2, [[((1, 0), 1.0)]])
    arc = integrate_flow(lin, [1.0], [0.2, 0.3], Box((1.0, 1.0)))
    np.testing.assert_allclose(arc.at([0.4]), [[-0.2, 0.3]], atol=1e-9)
    assert arc.delta1 == pytest.approx(1.2, abs=1e-9)


def test_flow_stops_on_critical_set():
    arc = integrate_flow(CUBE, [1.0], [0.5], I1)
    assert arc.cause == "Sigma"
    assert arc.delta1 == pytest.approx(0.5, abs=1e-6)
    assert abs(arc.ell[0]) < 1e-6


def test_flow_rejects_critical_start():
    with pytest.raises(ValueError):
        integrate_flow(CUBE, [1.0], [0.0], I1)
    with pytest.raises(ValueError):
        build_gamma(CUBE, [1.0], [0.0], I1, 2 / 3, 1 / 3)


def test_cubic_concatenation():
    h = homogeneous_certificate(CUBE)
    c = build_gamma(CUBE, [1.0], [0.5], I1, h.theta, h.C_L)
    assert c.cause == "SigmaThenConcatenated" and c.concatenations == 1
    assert [type(p) for p in c.pieces] == [FlowArc, Segment, FlowArc]
    arc1, seg, arc2 = c.pieces
    t0 = seg.end[0]
    assert t0 < 0
    # pieces: 0.5 -> 0, 0 -> t0, t0 -> -1
    assert arc1.delta1 == pytest.approx(0.5, abs=1e-6)
    assert seg.length == pytest.approx(abs(t0), abs=1e-6)
    assert arc2.delta1 == pytest.approx(1 - abs(t0), abs=1e-6)
    assert c.delta0 == pytest.approx(1.5, abs=1e-6)
    np.testing.assert_allclose(c.terminal, [-1.0], atol=1e-9)
    rep = verify_decrease(c, CUBE, h.theta, h.C_L)
    assert rep.passed and rep.lemma_passed


def test_radial_single_arc():
    for t in ([0.3, -0.1], [-0.05, 0.02]):
        c = build_gamma(RADIAL, [1.0], t, Box((1.0, 1.0)), 0.5, 0.5)
        assert c.cause == "Boundary" and len(c.pieces) == 1
        assert np.max(np.abs(c.terminal)) == pytest.approx(1.0, abs=1e-9)


def test_decrease_slack_neg_square():
    c = build_gamma(NEG_SQ, [1.0], [0.3], I1, 0.5, 0.5)
    rep = verify_decrease(c, NEG_SQ, 0.5, 0.5)
    assert rep.passed
    assert rep.slack_factor >= 128 * (1 - 1e-6)
    # lhs(tau) = tau^2 + 0.6 tau along the escape
    np.testing.assert_allclose(rep.lhs, rep.tau ** 2 + 0.6 * rep.tau, atol=1e-7)
    assert rep.lhs[0] == 0 and rep.rhs[0] == 0 and len(rep.tau) >= 100


def test_decrease_reports_witness_on_failure():
    c = build_gamma(NEG_SQ, [1.0], [0.3], I1, 0.5, 0.5)
    rep = verify_decrease(c, NEG_SQ, 0.5, 1e-3)  # far too small a constant
    assert not rep.passed and rep.witness is not None


def test_constants():
    assert decrease_constant(0.5, 0.5) == pytest.approx(1 / 128)
    assert lemma_constant(0.5, 0.5) == pytest.approx(0.25)
    assert length_bound(0.5, 0.5, 1.0) == pytest.approx(6 * math.sqrt(2))
    with pytest.raises(ValueError):
        decrease_constant(1.0, 0.5)
    with pytest.raises(ValueError):
        lemma_constant(0.75, 0.0)


def test_prop_properties_radial():
    W0, W1 = Box((1.0, 1.0)), Box((0.5, 0.5))
    starts = W1.grid_points(8)
    rep = verify_prop_properties(RADIAL, [[1.0]], starts, W0, W1, 0.5, 0.5)
    assert rep.delta_ok and rep.length_ok and rep.decrease_ok
    assert rep.min_delta0 >= 0.5 * (1 - 1e-3)
    assert rep.length_bound == pytest.approx(12.0)  # sup |phi| = 2 on the corners
    assert rep.unit_speed_error < 1e-6


def test_prop_single_point_family():
    W0, W1 = Box((1.0, 1.0)), Box((0.5, 0.5))
    rep = verify_prop_properties(RADIAL, [[1.0]], [[0.3, 0.0]], W0, W1, 0.5, 0.5)
    assert rep.curves == 1 and rep.min_delta0 == pytest.approx(rep.max_length)
    assert rep.min_delta0 == pytest.approx(0.7, abs=1e-9)


def test_prop_errors():
    W0 = Box((1.0, 1.0))
    with pytest.raises(ValueError):
        verify_prop_properties(RADIAL, [[1.0]], [[0.3, 0.0]], W0, W0, 0.5, 0.5)
    with pytest.raises(ValueError):
        verify_prop_properties(RADIAL, [[1.0]], [[0.0, 0.0]], W0, Box((0.5, 0.5)), 0.5, 0.5)


# -- invariants ------------------------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(st.floats(-0.9, 0.9), st.floats(-0.9, 0.9))
def test_radial_flows_are_unit_speed_and_monotone(a, b):
    if math.hypot(a, b) < 1e-3:
        return
    c = build_gamma(RADIAL, [1.0], [a, b], Box((1.0, 1.0)), 0.5, 0.5)
    assert abs(c.polyline_length(4000) - c.delta0) / c.delta0 < 1e-6
    assert flow_monotone(c.pieces[0], RADIAL, [1.0])
    assert verify_decrease(c, RADIAL, 0.5, 0.5).passed


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.95, 0.95).filter(lambda v: abs(v) > 1e-2))
def test_cubic_curves_pass_decrease(t):
    h = homogeneous_certificate(CUBE)
    c = build_gamma(CUBE, [1.0], [t], I1, h.theta, h.C_L)
    assert verify_decrease(c, CUBE, h.theta, h.C_L).passed
    assert c.cause in ("Boundary", "SigmaThenConcatenated")


def test_semigroup():
    ode = OdeSpec(rtol=1e-6, atol=1e-6)
    for phi, t, W in ((RADIAL, [0.2, 0.1], Box((1.0, 1.0))), (CUBE, [0.8], I1), (NEG_SQ, [0.1], I1)):
        d = integrate_flow(phi, [1.0], t, W, ode).delta1
        assert semigroup_defect(phi, [1.0], t, W, 0.3 * d, 0.4 * d, ode) < 1e-5


def test_power_inequalities_random():
    r = np.random.default_rng(0)
    a = r.uniform(1e-6, 10, 10_000)
    b = a + r.uniform(0, 10, 10_000)
    rr = r.uniform(1 + 1e-9, 4, 10_000)
    assert np.all(power_inequalities_hold(a, b, rr))


# -- arithmetic ------------------------------------------------------------------------

def test_kappa_window_examples():
    w = kappa_window(2.0, 0.75)
    assert (w.lo, w.hi, w.kappa) == pytest.approx((0.5, 0.75, 0.625))
    assert w.exponent == pytest.approx(0.25)
    d = kappa_window(2.0, 0.5)
    assert d.degenerate and (d.lo, d.hi) == pytest.approx((0.5, 1.0))
    n = kappa_window(1.01, 0.99)
    assert n.width == pytest.approx((2 - 2 * 0.99) * (1 - 1 / 1.01))
    assert n.width > 0
    with pytest.raises(ValueError):
        kappa_window(1.0, 0.75)
    with pytest.raises(ValueError):
        kappa_window(2.0, 1.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(1.01, 10.0), st.floats(0.5, 0.99))
def test_kappa_window_always_nonempty(s, theta):
    w = kappa_window(s, theta)
    assert w.lo < w.kappa < w.hi
    if not w.degenerate:
        assert w.exponent < 1 / s


def test_xi_threshold_examples():
    r = xi_threshold(1.0, 1.0, 0.75, 0.625, 0.5)
    assert r.threshold == pytest.approx(32 ** (8 / 3))
    assert r.g_min == pytest.approx(r.g_min_brute, rel=1e-6)
    half = xi_threshold(1.0, 0.5, 0.5, 0.6, 0.3)
    assert half.threshold == pytest.approx((4.0 / 0.5) ** (1 / 0.4))
    with pytest.raises(ValueError):
        xi_threshold(0.0, 1.0, 0.75, 0.5, 0.5)


def test_g_nonnegative_beyond_half_threshold():
    c, C_phi, kappa = 0.5, 1.0, 0.6
    thr = xi_threshold(C_phi, c, 0.5, kappa, 0.3).threshold
    tau = np.linspace(0, 5, 2001)
    for xi_abs in (thr, 2 * thr, 10 * thr):
        assert np.all(g_function(tau, xi_abs, c, 4 * C_phi ** 2, 0.5, kappa) >= -1e-9 * xi_abs)


def test_lipschitz_constant():
    assert lipschitz_constant(RADIAL, Box((1.0, 1.0))) == pytest.approx(2 * math.sqrt(2))
    assert lipschitz_constant(CUBE, I1) == pytest.approx(3.0)


def test_flow_stops_at_local_minimum_without_chattering():
    # the field reverses sign at the minimum of t^2; the arc must stop there at once
    sq = PolynomialMap(1, [[((2,), 1.0)]])
    arc = integrate_flow(sq, [1.0], [0.37], I1, OdeSpec(rtol=1e-6, atol=1e-6))
    assert arc.cause == "Sigma"
    assert arc.delta1 == pytest.approx(0.37, abs=1e-6)
    assert len(arc.tau) < 50
