"""Dormand-Prince 5(4) embedded Runge-Kutta pair for small ODE systems.

States are plain lists of floats; the systems integrated here have at most six
components, where list arithmetic beats numpy's per-call overhead.
"""
from __future__ import annotations

import math
from typing import Callable, Iterator, Sequence

from .errors import IntegrationError, StepUnderflowError

RHS = Callable[[float, list], list]

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6]
# 5th-order weights minus the embedded 4th-order weights
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def dp45_steps(
    f: RHS,
    x0: float,
    y0: Sequence[float],
    x_end: float,
    rtol: float = 1e-10,
    atol: float | None = None,
    h0: float | None = None,
    max_steps: int = 200_000,
) -> Iterator[tuple[float, list, float, list]]:
    """Yield accepted steps ``(x_prev, y_prev, x_new, y_new)`` until ``x_end``.

    Exceptions raised by ``f`` propagate (domain exits, singularities).
    """
    if atol is None:
        atol = rtol
    span = x_end - x0
    if span == 0.0:
        return
    direction = 1.0 if span > 0 else -1.0
    y = [float(v) for v in y0]
    n = len(y)
    x = float(x0)
    h = abs(h0) if h0 else min(abs(span), 0.05 * abs(span) + 1e-3)
    k1 = f(x, y)
    steps = 0
    while direction * (x_end - x) > 0:
        steps += 1
        if steps > max_steps:
            raise IntegrationError(f"exceeded {max_steps} steps")
        if h < 1e-14 * max(1.0, abs(x)):
            raise StepUnderflowError(f"step size underflow at x = {x!r}")
        last = h >= direction * (x_end - x)
        hs = (x_end - x) if last else direction * h
        ks = [k1]
        for s in range(1, 7):
            a = _A[s]
            ys = [y[i] + hs * sum(a[j] * ks[j][i] for j in range(s)) for i in range(n)]
            ks.append(f(x + _C[s] * hs, ys))
            if s == 6:
                y_new = ys
        err = 0.0
        for i in range(n):
            e = hs * sum(_E[j] * ks[j][i] for j in range(7))
            sc = atol + rtol * max(abs(y[i]), abs(y_new[i]))
            err = max(err, abs(e) / sc)
        if not math.isfinite(err):
            h *= 0.2
            continue
        if err <= 1.0:
            x_new = x_end if last else x + hs
            yield x, y, x_new, y_new
            x, y, k1 = x_new, y_new, ks[6]
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h = abs(hs) * fac
        else:
            h = abs(hs) * max(0.2, 0.9 * err ** -0.2)


def dp45(f: RHS, x0: float, y0: Sequence[float], x_end: float, rtol: float = 1e-10,
         atol: float | None = None, h0: float | None = None) -> list:
    """Integrate from ``x0`` to ``x_end`` and return the final state."""
    y = [float(v) for v in y0]
    for _, _, _, y in dp45_steps(f, x0, y0, x_end, rtol, atol, h0):
        pass
    return y


def dp45_dense(f: RHS, x0: float, y0: Sequence[float], xs: Sequence[float], rtol: float = 1e-10,
               atol: float | None = None) -> list[list]:
    """States at each of the monotone abscissae ``xs`` (restarting at each one)."""
    out, x, y = [], float(x0), [float(v) for v in y0]
    for xt in xs:
        y = dp45(f, x, y, xt, rtol, atol)
        x = xt
        out.append(y)
    return out
