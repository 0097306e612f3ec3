import math

import pytest

from veronese.errors import StepUnderflowError
from veronese.integrate import dp45, dp45_dense, dp45_steps


def test_exponential_growth():
    y = dp45(lambda x, s: [s[0]], 0.0, [1.0], 2.0, rtol=1e-12)
    assert y[0] == pytest.approx(math.exp(2.0), rel=1e-10)


def test_backward_integration():
    y = dp45(lambda x, s: [s[0]], 1.0, [math.e], 0.0, rtol=1e-12)
    assert y[0] == pytest.approx(1.0, rel=1e-10)


def test_harmonic_oscillator_energy():
    f = lambda x, s: [s[1], -s[0]]
    y = dp45(f, 0.0, [1.0, 0.0], 10.0, rtol=1e-12)
    assert y[0] == pytest.approx(math.cos(10.0), abs=1e-9)
    assert y[1] == pytest.approx(-math.sin(10.0), abs=1e-9)


def test_steps_land_on_endpoint():
    steps = list(dp45_steps(lambda x, s: [1.0], 0.0, [0.0], 0.7))
    assert steps[-1][2] == 0.7
    assert steps[-1][3][0] == pytest.approx(0.7, abs=1e-14)


def test_dense_output():
    xs = [0.25, 0.5, 1.0]
    out = dp45_dense(lambda x, s: [2 * x], 0.0, [0.0], xs, rtol=1e-12)
    assert [o[0] for o in out] == pytest.approx([x * x for x in xs], abs=1e-13)


def test_blow_up_underflows():
    # y' = y^2 from y(0) = 1 blows up at x = 1
    with pytest.raises(StepUnderflowError):
        dp45(lambda x, s: [s[0] * s[0]], 0.0, [1.0], 2.0, rtol=1e-10)
