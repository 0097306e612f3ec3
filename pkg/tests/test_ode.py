import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from veronese.connection import constant_curvature_web
from veronese.errors import DomainExitError, SolverError
from veronese.jetcalc import Rect
from veronese.ode import (ExpressionODE, RectifyingMap, check_projective_condition, derivative_form,
                          geodesic_ode, integrate_geodesic, rectifying_phi, transformed_residuals)
from veronese.web import from_3web, leaf_through

from conftest import SQUARE


def test_flat_ode_is_trivial(flat):
    ode = geodesic_ode(flat)
    assert ode.phi(0.3, 0.1, 2.0) == 0.0
    curve = integrate_geodesic(ExpressionODE("0", SQUARE), 0.0, 0.0, 1.0, 1.0)
    assert curve[-1] == pytest.approx([1.0, 1.0, 1.0], abs=1e-12)


@given(st.floats(-0.9, 0.9), st.floats(-0.9, 0.9), st.floats(-3, 3))
def test_constant_curvature_phi(x, y, p):
    ode = geodesic_ode(constant_curvature_web(1.5))
    assert ode.phi(x, y, p) == pytest.approx(-1.5 * y * p - 1.5 * x * p * p, abs=1e-12)


@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.floats(-3, 3))
def test_bilinear_phi(x, y, p):
    ode = geodesic_ode(from_3web("x+y+x*y"))
    want = -p / (1 + x) + p * p / (1 + y)
    assert ode.phi(x, y, p) == pytest.approx(want, rel=1e-12, abs=1e-12)
    assert ode.phi_from_potential(x, y, p) == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_projective_condition_reports():
    dom = Rect(0.0, 1.0, 0.0, 1.0)
    assert check_projective_condition(geodesic_ode(from_3web("x+y+x*y"))).passed
    quartic = check_projective_condition(ExpressionODE("p^4", dom))
    assert not quartic.passed and quartic.max_abs == pytest.approx(24.0)
    assert check_projective_condition(ExpressionODE("p^3*sin(x)", dom)).max_abs < 1e-12


def test_leaf_geodesic_identity(curved):
    ode = geodesic_ode(curved)
    for t, (x0, y0) in [(0.3, (-0.8, 0.1)), (-0.5, (-0.5, -0.4)), (1.0, (-0.2, 0.5))]:
        a, b = curved.pair(x0, y0)
        xs = np.linspace(x0, 0.4, 11)[1:]
        curve = integrate_geodesic(ode, x0, y0, -t * a / b, 0.4, rtol=1e-12, x_eval=xs)
        for x, y, p in curve:
            assert y == pytest.approx(leaf_through(curved, t, (x0, y0), x, rtol=1e-12), abs=1e-8)
            assert ode.slope_parameter(x, y, p) == pytest.approx(t, abs=1e-8)


def test_geodesic_domain_exit(flat):
    with pytest.raises(DomainExitError):
        integrate_geodesic(geodesic_ode(flat), 0.0, 0.0, 5.0, 0.9)


def test_rectifying_phi_flat(flat):
    assert rectifying_phi(flat, 0.3, 0.7) == (pytest.approx(0.7), pytest.approx(0.0, abs=1e-14))


def test_rectifying_phi_constant_curvature():
    C, y0 = 1.0, 0.0
    web = constant_curvature_web(C)
    phi = RectifyingMap(web, y0)
    for x, y in [(0.5, 0.6), (-0.7, -0.2)]:
        want = y0 + (math.exp(C * x * y) - math.exp(C * x * y0)) / (C * x)
        assert phi(x, y) == pytest.approx(want, abs=1e-12)


def test_rectifying_phi_bilinear(bilinear):
    phi = RectifyingMap(bilinear)
    y0 = phi.y0
    for x, y in [(0.3, 0.7), (0.9, 0.05)]:
        j = phi.jet(x, y)
        assert j.value == pytest.approx(y0 + (1 + x) * (math.log(1 + y) - math.log(1 + y0)), abs=1e-12)
        assert j.x == pytest.approx(math.log(1 + y) - math.log(1 + y0), abs=1e-12)
        assert j.xx == pytest.approx(0.0, abs=1e-12)
        # phi_y equals w_y / w_x
        assert j.y == pytest.approx((1 + x) / (1 + y), rel=1e-10)


def test_inverse_round_trip(curved):
    phi = RectifyingMap(curved)
    for x, y in [(0.4, -0.9), (-0.6, 0.75), (0.0, 0.3)]:
        assert phi.inverse(x, phi(x, y)) == pytest.approx(y, abs=1e-12)
    with pytest.raises(SolverError):
        phi.inverse(0.4, 50.0)


def test_derivative_form_bilinear_oracle(bilinear):
    g = derivative_form(bilinear)
    y0 = g.phi.y0
    for xt, yt in [(0.3, 0.6), (0.8, 0.2), (0.1, 0.75)]:
        assert g.g(xt, yt) == pytest.approx((yt - y0) / (1 + xt), abs=1e-8)


def test_derivative_form_flat(flat):
    g = derivative_form(flat)
    assert g.g_jet(0.2, 0.3) == (pytest.approx(0.0, abs=1e-14),) * 3


def test_transformed_geodesic_residual(curved):
    ode = geodesic_ode(curved)
    curve = integrate_geodesic(ode, -0.6, 0.2, -0.4, 0.3, rtol=1e-12, x_eval=np.linspace(-0.5, 0.3, 6))
    assert np.max(np.abs(transformed_residuals(derivative_form(curved), curve))) < 1e-6
