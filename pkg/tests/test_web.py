import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from veronese.errors import DomainExitError, OutOfDomainError, TransversalityError
from veronese.jetcalc import Rect
from veronese.projective import INFINITY
from veronese.web import (coframe, coframe_homogeneous, from_3web, from_coframe, leaf_direction,
                          leaf_field, leaf_polyline, leaf_through)

from conftest import SQUARE


def test_flat_leaves(flat):
    assert leaf_through(flat, 1.0, (0.0, 0.5), 1.0) == pytest.approx(-0.5, abs=1e-12)
    assert leaf_through(flat, 2.0, (0.0, 0.0), 0.25) == pytest.approx(-0.5, abs=1e-12)


def test_bilinear_leaf_closed_form(bilinear):
    # (1 + y)(1 + x)^t is constant along leaves of F_t
    t, (x0, y0), x1 = 0.5, (1.0, 0.2), 0.0
    want = (1 + y0) * (1 + x0) ** t / (1 + x1) ** t - 1
    assert leaf_through(bilinear, t, (x0, y0), x1) == pytest.approx(want, abs=1e-9)


def test_coframe_values(bilinear):
    assert list(coframe(bilinear, 2.0, (0.0, 0.0))) == [2.0, 1.0]
    assert list(coframe(bilinear, INFINITY, (0.3, 0.3))) == [1.0, 0.0]


def test_special_foliations(flat):
    assert list(leaf_direction(flat, 0.0, (0.1, 0.2))) == [1.0, 0.0]
    assert list(leaf_direction(flat, INFINITY, (0.1, 0.2))) == [0.0, 1.0]


def test_transversality_failure():
    with pytest.raises(TransversalityError) as exc:
        from_3web("x*y", domain=Rect(0.0, 1.0, -1.0, 1.0))
    assert exc.value.point == (0.0, -1.0)
    assert "w_y" in str(exc.value)


def test_t2_labels():
    web = from_3web("x+y", t2=3.0, domain=SQUARE)
    assert web.t2.value == pytest.approx(3.0)
    # the foliation ker dw sits at label 3
    d = leaf_direction(web, 3.0, (0.2, 0.1))
    assert d[0] + d[1] == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        from_3web("x+y", t2=0.0, domain=SQUARE)


def test_constant_curvature_zero_length(curved):
    assert leaf_through(curved, 1.0, (0.3, 1.0), 0.3) == 1.0


def test_out_of_domain(flat):
    with pytest.raises(OutOfDomainError):
        leaf_through(flat, 1.0, (2.0, 0.0), 0.0)
    with pytest.raises(DomainExitError):
        leaf_through(flat, 3.0, (-0.9, 0.0), 0.9)


def test_polyline_ends_on_target(curved):
    pts = leaf_polyline(curved, 0.4, (-0.5, 0.0), 0.5)
    assert pts[0, 0] == -0.5 and pts[-1, 0] == 0.5
    assert pts[-1, 1] == pytest.approx(leaf_through(curved, 0.4, (-0.5, 0.0), 0.5), abs=1e-12)


@given(st.floats(-3, 3), st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_annihilation(t, x, y):
    web = from_3web("x + y + 0.3*sin(x*y) + 0.1*x^2")
    assert coframe(web, t, (x, y)) @ leaf_direction(web, t, (x, y)) == pytest.approx(0.0, abs=1e-12)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_veronese_linearity(t1, t2, x, y):
    web = from_3web("x + y + x*y")
    a = coframe_homogeneous(web, 1.0, t1, (x, y)) + coframe_homogeneous(web, 1.0, t2, (x, y))
    b = coframe_homogeneous(web, 2.0, t1 + t2, (x, y))
    assert np.allclose(a, b, rtol=1e-14, atol=1e-14)


def test_leaf_field_jacobian(curved):
    V = leaf_field(curved, 0.7)
    v, jac = V.jet((0.2, -0.3))
    h = 1e-6
    fd = (V((0.2 + h, -0.3)) - V((0.2 - h, -0.3))) / (2 * h)
    assert np.allclose(jac[:, 0], fd, atol=1e-8)


def test_coframe_backed_web():
    web = from_coframe("1", "exp(2*x*y)", SQUARE)
    a, b = web.pair(0.5, 0.5)
    assert (a, b) == (1.0, pytest.approx(math.exp(0.5)))
