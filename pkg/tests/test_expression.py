import math

import pytest
from hypothesis import given, strategies as st

from veronese.errors import ExpressionSyntaxError, SingularityError, UnknownIdentifierError
from veronese.jetcalc import parse_expression, to_text

XY = ("x", "y")


def test_evaluate_basic():
    e = parse_expression("2*x^2 - y/4 + exp(0)", XY)
    assert e.evaluate(3.0, 8.0) == pytest.approx(17.0)


def test_precedence_and_unary_minus():
    assert parse_expression("-x^2", XY).evaluate(3.0, 0.0) == -9.0
    assert parse_expression("2^3^2", XY).evaluate(0.0, 0.0) == 512.0
    assert parse_expression("x-y-1", XY).evaluate(5.0, 1.0) == 3.0
    assert parse_expression("x/y/2", XY).evaluate(8.0, 2.0) == 2.0


def test_syntax_error_offset():
    with pytest.raises(ExpressionSyntaxError) as exc:
        parse_expression("x+*y", XY)
    assert exc.value.offset == 2


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError) as exc:
        parse_expression("x+C*y", XY)
    assert exc.value.offset == 2
    assert "C" in str(exc.value)


def test_exponent_must_be_constant():
    with pytest.raises(ExpressionSyntaxError):
        parse_expression("x^y", XY)


def test_empty_input():
    with pytest.raises(ExpressionSyntaxError) as exc:
        parse_expression("   ", XY)
    assert exc.value.offset == 0


def test_singular_evaluation():
    with pytest.raises(SingularityError):
        parse_expression("1/(x-y)", XY).evaluate(1.0, 1.0)
    with pytest.raises(SingularityError):
        parse_expression("ln(x)", XY).evaluate(-1.0, 0.0)


# random expressions for the print/parse round trip
leaves = st.one_of(st.sampled_from(["x", "y"]), st.integers(0, 9).map(str),
                   st.sampled_from(["0.5", "1.25", "3.0"]))


def _extend(inner):
    return st.one_of(
        st.tuples(inner, st.sampled_from("+-*/"), inner).map(lambda t: f"({t[0]}){t[1]}({t[2]})"),
        st.tuples(st.sampled_from(["exp", "sin", "cos"]), inner).map(lambda t: f"{t[0]}({t[1]})"),
        inner.map(lambda s: f"-({s})"),
        st.tuples(inner, st.integers(0, 3)).map(lambda t: f"({t[0]})^{t[1]}"),
    )


expressions = st.recursive(leaves, _extend, max_leaves=8)


@given(expressions, st.floats(-1, 1), st.floats(-1, 1))
def test_print_parse_round_trip(text, a, b):
    e = parse_expression(text, XY)
    printed = to_text(e.root)
    again = parse_expression(printed, XY)
    assert to_text(again.root) == printed
    try:
        v1 = e.evaluate(a, b)
    except SingularityError:
        return
    v2 = again.evaluate(a, b)
    assert v2 == pytest.approx(v1, rel=1e-12, abs=1e-12) or (math.isinf(v1) and math.isinf(v2))


def test_minimal_parentheses():
    assert to_text(parse_expression("((x+y))*(x)", XY).root) == "(x+y)*x"
    assert to_text(parse_expression("x-(y-1)", XY).root) == "x-(y-1)"
    assert to_text(parse_expression("(x^2)^3", XY).root) == "(x^2)^3"
