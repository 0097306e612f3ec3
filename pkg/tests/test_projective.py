import math

import pytest
from hypothesis import assume, given, strategies as st

from veronese.projective import IDENTITY, INFINITY, MoebiusMap, ProjParam

coef = st.floats(-3, 3, allow_nan=False)


def maps():
    return st.tuples(coef, coef, coef, coef).filter(lambda c: abs(c[0] * c[3] - c[1] * c[2]) > 1e-2).map(
        lambda c: MoebiusMap(*c))


def test_normalization():
    p = ProjParam(-2.0, 4.0)
    assert (p.s, p.t) == (0.5, -1.0)
    assert ProjParam.affine(INFINITY).is_infinite
    assert ProjParam.affine(3.0).value == 3.0


def test_degenerate_rejected():
    with pytest.raises(ValueError):
        MoebiusMap(1.0, 2.0, 2.0, 4.0)
    with pytest.raises(ValueError):
        ProjParam(0.0, 0.0)


def test_infinity_handling():
    inv = MoebiusMap(0.0, 1.0, 1.0, 0.0)
    assert inv(0.0) == INFINITY
    assert inv(INFINITY) == 0.0
    assert inv(ProjParam.affine(2.0)).value == 0.5


@given(maps(), maps(), st.floats(-2, 2))
def test_composition_law(m, n, t):
    lhs, rhs = (m @ n)(t), m(n(t))
    assume(math.isfinite(lhs) and math.isfinite(rhs) and abs(lhs) < 1e6)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


@given(maps(), st.floats(-2, 2))
def test_inverse(m, t):
    u = m(t)
    assume(math.isfinite(u) and abs(u) < 1e6)
    assert m.inverse()(u) == pytest.approx(t, rel=1e-8, abs=1e-8)


@given(maps(), st.floats(-2, 2))
def test_derivatives(m, t):
    assume(abs(m.c * t + m.d) > 0.1)
    h = 1e-5
    fd1 = (m(t + h) - m(t - h)) / (2 * h)
    fd2 = (m(t + h) - 2 * m(t) + m(t - h)) / h ** 2
    assert m.derivative(t) == pytest.approx(fd1, rel=1e-6, abs=1e-6)
    assert m.second_derivative(t) == pytest.approx(fd2, rel=1e-3, abs=1e-3)


def test_identity():
    assert IDENTITY.is_identity
    assert (IDENTITY @ IDENTITY).is_identity
