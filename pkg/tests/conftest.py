import math

import numpy as np
import pytest
from hypothesis import settings

from veronese.connection import constant_curvature_web
from veronese.jetcalc import Rect
from veronese.web import from_3web

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

SQUARE = Rect(-1.0, 1.0, -1.0, 1.0)


@pytest.fixture(scope="session")
def flat():
    return from_3web("x+y", domain=SQUARE, name="flat")


@pytest.fixture(scope="session")
def bilinear():
    return from_3web("x+y+x*y", name="bilinear")


@pytest.fixture(scope="session")
def curved():
    return constant_curvature_web(1.0)


def random_potential(rng: np.random.Generator) -> str:
    """``x + y`` plus small smooth terms; on the unit square the gradient of the
    perturbation stays below 0.8 in each slot, so ``w_x, w_y > 0``."""
    b1, b2 = rng.uniform(-2, 2, 2)
    a1 = rng.uniform(-0.12, 0.12)
    d1, d2 = rng.uniform(-1, 1, 2)
    a2 = rng.uniform(-0.03, 0.03)
    a3 = rng.uniform(-0.1, 0.1)
    c = rng.uniform(0, math.pi)
    return (f"x + y + {a1:.6f}*sin({b1:.6f}*x + {b2:.6f}*y + {c:.6f})"
            f" + {a2:.6f}*exp({d1:.6f}*x + {d2:.6f}*y) + {a3:.6f}*x^2*y")


def random_webs(seed: int, n: int):
    rng = np.random.default_rng(seed)
    return [from_3web(random_potential(rng), name=f"random{i}") for i in range(n)]


# acceptance summary: one line per criterion -----------------------------------

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    num, title = mark.args
    entry = _CRITERIA.setdefault(num, {"title": title, "passed": True, "seconds": 0.0, "tests": 0,
                                       "measured": []})
    entry["passed"] &= rep.passed
    entry["seconds"] += rep.duration
    entry["tests"] += 1
    entry["measured"] += [v for k, v in item.user_properties if k == "measured"]


@pytest.fixture
def measured(request):
    """Record ``(label, value, bound)`` for the acceptance summary."""
    def record(label, value, bound=None):
        request.node.user_properties.append(("measured", (label, float(value), bound)))
        return value
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        e = _CRITERIA[num]
        status = "PASS" if e["passed"] else "FAIL"
        terminalreporter.write_line(
            f"{status}  criterion {num:2d}  {e['title']}  ({e['tests']} tests, {e['seconds']:.1f} s)")
        for label, value, bound in e["measured"]:
            tail = "" if bound is None else f"  (bound {bound:.0e})"
            terminalreporter.write_line(f"        {label}: {value:.3e}{tail}")
