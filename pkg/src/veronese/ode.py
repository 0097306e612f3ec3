"""The geodesic equation ``y'' = Phi(x, y, y')`` of a web connection and its
rectification to the total derivative of a first-order equation.

For a web with ``(a, b) ~ (w_x, w_y)``::

    Phi = A p - B p^2,    A = G^x_xx,  B = G^y_yy

Leaves of ``F_t`` solve it with ``t = -(b / a) p`` constant along each leaf.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.integrate import quad_vec

from .connection import Connection2, WebConnection
from .errors import DomainExitError, IntegrationError, SolverError
from .integrate import dp45_dense, dp45_steps
from .jetcalc import Expression, Rect, parse_expression
from .jetcalc.jets import algebra
from .web import DEFAULT_RTOL, WebSpec

PROJECTIVE_THRESHOLD = 1e-10


class SecondOrderODE:
    """``y'' = Phi(x, y, p)`` on a box in ``(x, y)``; ``p`` is unrestricted."""

    domain: Rect

    def phi(self, x: float, y: float, p: float) -> float:
        raise NotImplementedError

    def p_jet(self, x: float, y: float, p: float, order: int = 4) -> tuple:
        """Taylor coefficients of ``Phi`` in ``p`` alone (``x``, ``y`` frozen)."""
        raise NotImplementedError

    def rhs(self) -> Callable[[float, list], list]:
        dom = self.domain

        def f(x, st):
            y, p = st
            if not dom.contains(x, y, 1e-9):
                raise DomainExitError(f"geodesic left the domain at ({x:.6g}, {y:.6g})")
            return [p, self.phi(x, y, p)]
        return f


class WebGeodesicODE(SecondOrderODE):
    def __init__(self, web: WebSpec):
        self.web = web
        self.domain = web.domain
        self._conn = WebConnection(web)

    def coefficients(self, x: float, y: float) -> tuple[float, float]:
        """``(A, B)`` with ``Phi = A p - B p^2``."""
        return self._conn.diagonal(x, y)

    def phi(self, x, y, p):
        A, B = self._conn.diagonal(x, y)
        return (A - B * p) * p

    def phi_from_potential(self, x, y, p) -> float:
        """``[(w_y w_xx - w_x w_xy) p + (w_y w_xy - w_x w_yy) p^2] / (w_x w_y)``, read
        off the second partials of ``w`` (or of the coframe pair) directly."""
        a, b = self.web.pair_coeffs(x, y, 1)
        a0, ax, ay = a[0], a[1], a[2]
        b0, bx, by = b[0], b[1], b[2]
        # for a potential: ax = w_xx, ay = bx = w_xy, by = w_yy
        return ((b0 * ax - a0 * bx) * p + (b0 * ay - a0 * by) * p * p) / (a0 * b0)

    def p_jet(self, x, y, p, order=4):
        A, B = self._conn.diagonal(x, y)
        alg = algebra(1, order)
        P = alg.variable(0, p)
        return alg.sub(alg.scale(A, P), alg.scale(B, alg.mul(P, P)))

    def slope_parameter(self, x: float, y: float, p: float) -> float:
        """``t = -(w_y / w_x) p``: the foliation whose leaf has slope ``p`` here."""
        a, b = self.web.pair(x, y)
        return -b / a * p


class ExpressionODE(SecondOrderODE):
    """``Phi`` given as an expression in ``x, y, p``."""

    def __init__(self, phi: str | Expression, domain: Rect):
        self.expression = phi if isinstance(phi, Expression) else parse_expression(phi, ("x", "y", "p"))
        self.domain = domain

    def phi(self, x, y, p):
        return self.expression.evaluate(x, y, p)

    def p_jet(self, x, y, p, order=4):
        alg = algebra(1, order)
        return self.expression.jet_coeffs(alg, (alg.const(x), alg.const(y), alg.variable(0, p)))


class ConnectionODE(SecondOrderODE):
    """Unparametrized geodesics of an arbitrary symmetric connection::

        y'' = -G^y_xx + (G^x_xx - 2 G^y_xy) p + (2 G^x_xy - G^y_yy) p^2 + G^x_yy p^3
    """

    def __init__(self, conn: Connection2):
        self.conn = conn
        self.domain = conn.domain

    def cubic(self, x, y) -> tuple[float, float, float, float]:
        xxx, xxy, xyy, yxx, yxy, yyy = self.conn.components(x, y)
        return -yxx, xxx - 2 * yxy, 2 * xxy - yyy, xyy

    def phi(self, x, y, p):
        c0, c1, c2, c3 = self.cubic(x, y)
        return c0 + p * (c1 + p * (c2 + p * c3))

    def p_jet(self, x, y, p, order=4):
        alg = algebra(1, order)
        P = alg.variable(0, p)
        out = alg.const(0.0)
        for c in reversed(self.cubic(x, y)):
            out = alg.shift(alg.mul(out, P), c)
        return out


def geodesic_ode(web: WebSpec) -> WebGeodesicODE:
    return WebGeodesicODE(web)


# the cubic-in-p condition ----------------------------------------------------------

@dataclass(frozen=True)
class ProjectiveReport:
    max_abs: float
    worst_sample: tuple[float, float, float]
    threshold: float

    @property
    def passed(self) -> bool:
        return self.max_abs < self.threshold


def default_samples(domain: Rect, n: int = 6, p_values: Sequence[float] = (-2.0, -0.5, 0.0, 0.7, 3.0)):
    xs, ys = domain.grid(n, margin=0.05)
    return [(float(x), float(y), float(p)) for x in xs for y in ys for p in p_values]


def check_projective_condition(ode: SecondOrderODE, samples=None,
                               threshold: float = PROJECTIVE_THRESHOLD) -> ProjectiveReport:
    """Largest ``|d^4 Phi / dp^4|`` over ``samples`` of ``(x, y, p)``."""
    if samples is None:
        samples = default_samples(ode.domain)
    worst, where = -1.0, (math.nan,) * 3
    for x, y, p in samples:
        c = ode.p_jet(x, y, p, 4)
        v = abs(24.0 * c[4])
        if v > worst:
            worst, where = v, (x, y, p)
    return ProjectiveReport(worst, where, threshold)


# geodesics ---------------------------------------------------------------------

def integrate_geodesic(ode: SecondOrderODE, x0: float, y0: float, p0: float, x_end: float,
                       rtol: float = DEFAULT_RTOL, atol: float | None = None,
                       x_eval: Sequence[float] | None = None) -> np.ndarray:
    """Rows ``(x, y, p)``: accepted integrator nodes, or the states at ``x_eval``."""
    ode.domain.require(x0, y0)
    f = ode.rhs()
    if x_eval is not None:
        states = dp45_dense(f, x0, [y0, p0], x_eval, rtol, atol)
        return np.array([(xe, s[0], s[1]) for xe, s in zip(x_eval, states)])
    rows = [(x0, y0, p0)]
    for _, _, xn, st in dp45_steps(f, x0, [y0, p0], x_end, rtol, atol):
        rows.append((xn, st[0], st[1]))
    return np.array(rows)


# rectification -----------------------------------------------------------------

class PhiJet(NamedTuple):
    value: float
    x: float
    y: float
    xx: float
    xy: float
    yy: float


@dataclass
class RectifyingMap:
    """``phi(x, y) = y0 + int_{y0}^{y} (w_y / w_x)(x, s) ds``, so ``phi_y = w_y / w_x``.

    ``phi_x`` and ``phi_xx`` come from integrating the ``x``-jet of the
    integrand; ``phi_y``, ``phi_xy``, ``phi_yy`` are read off the integrand.
    """

    web: WebSpec
    y0: float | None = None
    epsabs: float = 1e-13
    epsrel: float = 1e-13
    _alg: object = field(default=None, repr=False)

    def __post_init__(self):
        if self.y0 is None:
            self.y0 = self.web.domain.center[1]
        self._alg = algebra(2, 2)

    def _integrand(self, x: float, s: float) -> tuple:
        a, b = self.web.pair_coeffs(x, s, 2)
        return self._alg.div(b, a)

    def _x_jet(self, x: float, s: float) -> np.ndarray:
        r = self._integrand(x, s)
        return np.array([r[0], r[1], 2.0 * r[3]])

    def _integral(self, x: float, y_from: float, y_to: float) -> np.ndarray:
        if y_from == y_to:
            return np.zeros(3)
        val, err = quad_vec(lambda s: self._x_jet(x, s), y_from, y_to,
                            epsabs=self.epsabs, epsrel=self.epsrel)
        if not np.all(np.isfinite(val)):
            raise IntegrationError(f"quadrature failed at x = {x!r}")
        return val

    def __call__(self, x: float, y: float) -> float:
        return self.y0 + float(self._integral(x, self.y0, y)[0])

    def jet(self, x: float, y: float) -> PhiJet:
        self.web.domain.require(x, y)
        I = self._integral(x, self.y0, y)
        r = self._integrand(x, y)
        return PhiJet(self.y0 + I[0], I[1], r[0], I[2], r[1], r[2])

    def inverse(self, x: float, y_tilde: float, tol: float = 1e-14) -> float:
        """``y`` with ``phi(x, y) = y_tilde``: bisection to a short bracket, then Newton."""
        dom = self.web.domain
        lo, hi = dom.y_min, dom.y_max
        f_lo, f_hi = self(x, lo) - y_tilde, self(x, hi) - y_tilde
        if f_lo == 0.0:
            return lo
        if f_hi == 0.0:
            return hi
        if f_lo * f_hi > 0:
            raise SolverError(f"{y_tilde!r} is outside the image of the y-range at x = {x!r}")
        # bisection on the monotone slice until the bracket is short
        while hi - lo > dom.height / 16:
            mid = 0.5 * (lo + hi)
            f_mid = self(x, mid) - y_tilde
            if f_mid == 0.0:
                return mid
            if (f_mid > 0) == (f_hi > 0):
                hi, f_hi = mid, f_mid
            else:
                lo, f_lo = mid, f_mid
        y = 0.5 * (lo + hi)
        val = self(x, y)
        for _ in range(50):
            step = (y_tilde - val) / self._integrand(x, y)[0]
            y_new = min(max(y + step, lo), hi)
            val += float(self._integral(x, y, y_new)[0])
            if abs(y_new - y) <= tol * max(1.0, abs(y)):
                return y_new
            y = y_new
        raise SolverError(f"inverse of phi did not converge at ({x!r}, {y_tilde!r})")


def rectifying_phi(web: WebSpec, x: float, y: float, y0: float | None = None) -> tuple[float, float]:
    """``(phi, phi_x)`` at ``(x, y)``."""
    j = RectifyingMap(web, y0).jet(x, y)
    return j.value, j.x


class FirstOrderODE:
    """``y' = g(x, y)``; ``g_jet`` returns ``(g, g_x, g_y)``."""

    def __init__(self, g_jet: Callable[[float, float], tuple[float, float, float]], domain: Rect | None = None):
        self._g = g_jet
        self.domain = domain

    def g(self, x: float, y: float) -> float:
        return self._g(x, y)[0]

    def g_jet(self, x: float, y: float) -> tuple[float, float, float]:
        return self._g(x, y)

    def total_derivative(self, x: float, y: float, p: float) -> float:
        """Right side of ``y'' = g_x + g_y y'``."""
        g, gx, gy = self._g(x, y)
        return gx + gy * p


class DerivativeForm(FirstOrderODE):
    """``g(x~, y~) = phi_x(x~, phi^{-1}(x~, y~))``."""

    def __init__(self, phi: RectifyingMap):
        self.phi = phi
        super().__init__(self._jet, None)

    def _jet(self, xt, yt):
        y = self.phi.inverse(xt, yt)
        j = self.phi.jet(xt, y)
        gy = j.xy / j.y
        return j.x, j.xx - gy * j.x, gy


def derivative_form(web: WebSpec, y0: float | None = None) -> DerivativeForm:
    return DerivativeForm(RectifyingMap(web, y0))


def transformed_residuals(form: DerivativeForm, geodesic: np.ndarray) -> np.ndarray:
    """``y~'' - (g_x + g_y y~')`` along the image of a geodesic ``(x, y, p)`` under
    ``(x, y) -> (x, phi(x, y))``; all derivatives of the image come from ``phi``."""
    ode = WebGeodesicODE(form.phi.web)
    out = []
    for x, y, p in geodesic:
        j = form.phi.jet(x, y)
        yt = j.value
        pt = j.x + j.y * p
        acc = j.xx + 2 * j.xy * p + j.yy * p * p + j.y * ode.phi(x, y, p)
        out.append(acc - form.total_derivative(x, yt, pt))
    return np.array(out)
