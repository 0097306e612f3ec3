import math

import pytest
from hypothesis import given, strategies as st

from veronese.errors import SingularityError
from veronese.jetcalc import Jet, algebra, parse_expression

coord = st.floats(-1.5, 1.5, allow_nan=False)
positive = st.floats(0.2, 3.0, allow_nan=False)


def test_monomials_graded():
    alg = algebra(2, 2)
    assert alg.monomials == ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))
    assert alg.size == 6


def test_partial_of_product():
    x, y = Jet.variables((0.3, -0.7), 3)
    f = x * x * y
    assert f.value == pytest.approx(0.09 * -0.7)
    assert f.partial(2, 1) == pytest.approx(2.0)
    assert f.partial(1, 1) == pytest.approx(0.6)
    assert f.partial(0, 2) == 0.0


@given(coord, coord)
def test_leibniz(a, b):
    x, y = Jet.variables((a, b), 3)
    f, g = (x * y).sin(), (x - 2 * y).exp()
    h = f * g
    # d_x d_y (f g) = f_xy g + f_x g_y + f_y g_x + f g_xy
    lhs = h.partial(1, 1)
    rhs = (f.partial(1, 1) * g.value + f.partial(1, 0) * g.partial(0, 1)
           + f.partial(0, 1) * g.partial(1, 0) + f.value * g.partial(1, 1))
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


@given(positive, coord)
def test_log_exp_inverse(a, b):
    x, y = Jet.variables((a, b), 4)
    f = (x * x + y * y + 1.0).log().exp()
    g = x * x + y * y + 1.0
    for c1, c2 in zip(f.coeffs, g.coeffs):
        assert c1 == pytest.approx(c2, rel=1e-11, abs=1e-12)


@given(positive, coord)
def test_against_central_differences(a, b):
    e = parse_expression("sqrt(x)*cos(y) + x^3/(1+y^2)", ("x", "y"))
    j = e.jet((a, b), 2)
    h = 1e-5
    fx = (e.evaluate(a + h, b) - e.evaluate(a - h, b)) / (2 * h)
    fy = (e.evaluate(a, b + h) - e.evaluate(a, b - h)) / (2 * h)
    assert j.partial(1, 0) == pytest.approx(fx, rel=1e-7, abs=1e-7)
    assert j.partial(0, 1) == pytest.approx(fy, rel=1e-7, abs=1e-7)


def test_pow_integer_and_real():
    (x,) = Jet.variables((2.0,), 3)
    assert (x ** 3).partial(3) == pytest.approx(6.0)
    assert (x ** 0.5).partial(1) == pytest.approx(0.5 / math.sqrt(2.0))
    assert (x ** -2).partial(2) == pytest.approx(6.0 / 16.0)


def test_singularities():
    (x,) = Jet.variables((0.0,), 2)
    with pytest.raises(SingularityError):
        x.log()
    with pytest.raises(SingularityError):
        1.0 / x
    with pytest.raises(SingularityError):
        x.sqrt()


def test_derivative_drops_one_order():
    x, y = Jet.variables((0.5, 0.25), 3)
    f = x * x * x * y
    d = f.derivative(0)
    assert d.order == 2
    assert d.value == pytest.approx(3 * 0.25 * 0.25)
    assert d.partial(1, 1) == pytest.approx(f.partial(2, 1))


def test_compose_poly_substitution():
    # sin composed with a jet equals the jet of the composition
    palg = algebra(1, 4)
    poly = parse_expression("sin(u)", ("u",)).jet_coeffs(palg, palg.seed((0.3,)))
    alg = algebra(2, 3)
    x, y = alg.seed((0.1, 0.2))
    u = alg.add(x, alg.mul(y, y))          # u = x + y^2, value 0.14
    u = alg.shift(u, 0.3 - u[0])           # recentre the value to 0.3
    got = alg.compose_poly(poly, palg, (u,))
    want = alg.sin(u)
    for a, b in zip(got, want):
        assert a == pytest.approx(b, abs=1e-14)
