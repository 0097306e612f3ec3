"""The dual equation ``z'' = F(t, z, z')`` on the space of leaves, its invariant
``K0``, and the transformations that act on it.

A point ``z`` of the dual side is a leaf of ``F_t``, labelled by its ordinate
on the reference line ``x = x_ref``.  Fixing a point ``(x, y)`` of the plane
and letting ``t`` vary gives a dual solution ``t -> Z(t; x, y)``.

Both ``Z`` and its ``t``-derivatives are obtained from variational equations
along leaves rather than by differencing integrator output.  With
``r = w_x / w_y`` and base parameter ``u`` the leaf equation is ``y' = -u r``.
Along the leaf through ``(x_ref, z)`` the quantities ``Zu, Zy, Zuu, Zuy, Zyy``
(partials of ``Z`` at the moving point) obey::

    Zu'  = r Zy                       Zy'  = u r_y Zy
    Zuu' = 2 r Zuy                    Zyy' = u r_yy Zy + 2 u r_y Zyy
    Zuy' = r_y Zy + u r_y Zuy + r Zyy

``Zu`` is monotone in ``x``, so solving ``Zu = p`` is a one-dimensional event
search and ``F = Zuu`` there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DomainExitError, SingularityError, SolverError
from .integrate import dp45, dp45_steps
from .jetcalc import Expression, Rect, parse_expression
from .jetcalc.jets import algebra
from .projective import MoebiusMap, ParamLike
from .web import WebSpec, leaf_through

DUAL_RTOL = 1e-12
NEWTON_FD_STEP = 1e-6
NEWTON_MAX_ITER = 50
NEWTON_TOL = 1e-9
K0_FD_STEPS = (4e-3, 4e-3, 4e-3)   # (h_t, h_z, h_p) for web-backed K0

__all__ = [
    "MoebiusMap", "DualODE", "ExpressionDualODE", "WebDualODE", "TransformedDualODE",
    "TimePreservingPointTransform", "apply_moebius", "apply_point_transform",
    "first_integral", "dual_curve", "dual_jet", "dual_rhs", "solve_dual_point", "k0",
    "k0_grid", "default_x_ref", "default_query_grid",
]


# first integrals and dual curves ----------------------------------------------------

def default_x_ref(domain: Rect) -> float:
    return domain.x_min + 0.1 * domain.width


def first_integral(web: WebSpec, x_ref: float, t: ParamLike, point, rtol: float = DUAL_RTOL) -> float:
    """Ordinate on ``x = x_ref`` of the leaf of ``F_t`` through ``point``."""
    return leaf_through(web, t, point, x_ref, rtol)


def dual_curve(web: WebSpec, x_ref: float, point, t_grid: Sequence[float],
               rtol: float = DUAL_RTOL) -> np.ndarray:
    """Samples of ``t -> Z(t; point)``."""
    return np.array([first_integral(web, x_ref, t, point, rtol) for t in t_grid])


def _ratio_y(web: WebSpec):
    """``(r, r_y, r_yy)`` at a point for ``r = a / b``."""
    def f(x, y):
        c = web.ratio_coeffs(x, y, 2)
        return c[0], c[2], 2.0 * c[5]
    return f


class DualJet(NamedTuple):
    z: float
    z_t: float
    z_tt: float


def _label_chain(web: WebSpec, t: float) -> tuple[float, float, float]:
    """Base parameter ``u = mu(t)`` with ``mu'`` and ``mu''``."""
    mu = web.labels.inverse()
    u = mu(t)
    if math.isinf(u) or math.isinf(t):
        raise SolverError("the dual equation is written in finite labels only")
    return u, mu.derivative(t), mu.second_derivative(t)


def dual_jet(web: WebSpec, x_ref: float, t: float, point, rtol: float = DUAL_RTOL) -> DualJet:
    """``Z``, ``Z_t``, ``Z_tt`` at ``(t; point)`` from the forward variational system."""
    x0, y0 = float(point[0]), float(point[1])
    web.domain.require(x0, y0)
    u, m1, m2 = _label_chain(web, float(t))
    ratio = _ratio_y(web)
    dom = web.domain

    def f(x, s):
        y, yu, yuu = s
        if not dom.contains(x, y, 1e-9):
            raise DomainExitError(f"leaf left the domain at ({x:.6g}, {y:.6g})")
        r, ry, ryy = ratio(x, y)
        return [-u * r, -r - u * ry * yu, -2.0 * ry * yu - u * ryy * yu * yu - u * ry * yuu]

    z, zu, zuu = dp45(f, x0, [y0, 0.0, 0.0], x_ref, rtol, atol=rtol)
    return DualJet(z, zu * m1, zuu * m1 * m1 + zu * m2)


class DualPoint(NamedTuple):
    F: float
    x: float
    y: float


def _backward_rhs(web: WebSpec, u: float):
    ratio = _ratio_y(web)
    dom = web.domain

    def f(x, s):
        y, zu, zy, zuu, zuy, zyy = s
        if not dom.contains(x, y, 1e-9):
            raise DomainExitError(f"leaf left the domain at ({x:.6g}, {y:.6g})")
        r, ry, ryy = ratio(x, y)
        return [-u * r, r * zy, u * ry * zy, 2.0 * r * zuy,
                ry * zy + u * ry * zuy + r * zyy, u * ryy * zy + 2.0 * u * ry * zyy]
    return f


def _shoot(web: WebSpec, x_ref: float, u: float, z: float, pu: float, rtol: float) -> DualPoint:
    dom = web.domain
    if not dom.contains(x_ref, z):
        raise SolverError(f"z = {z!r} is not an ordinate of the reference line")
    state0 = [z, 0.0, 1.0, 0.0, 0.0, 0.0]
    if pu == 0.0:
        return DualPoint(0.0, x_ref, z)
    r0 = _ratio_y(web)(x_ref, z)[0]
    # Zu grows like r (x - x_ref): the sign of pu / r picks the direction
    x_end = dom.x_max if pu / r0 > 0 else dom.x_min
    f = _backward_rhs(web, u)
    try:
        for xp, sp, xn, sn in dp45_steps(f, x_ref, state0, x_end, rtol, atol=rtol):
            if (sn[1] - pu) * (sp[1] - pu) <= 0.0:
                return _refine(f, xp, sp, xn, sn, pu, rtol, r0)
    except DomainExitError:
        pass
    raise SolverError(f"p = {pu!r} (base parameter {u!r}, z = {z!r}) is not reached inside the domain")


def _refine(f, xp, sp, xn, sn, pu, rtol, r0) -> DualPoint:
    lo, hi = (xp, xn) if xp < xn else (xn, xp)
    # secant start, then Newton with dZu/dx = r Zy
    x = xp + (pu - sp[1]) * (xn - xp) / (sn[1] - sp[1])
    s = sp
    for _ in range(30):
        s = dp45(f, xp, sp, x, rtol, atol=rtol)
        g = s[1] - pu
        r = f(x, s)[1]          # r Zy
        step = -g / r
        x_new = min(max(x + step, lo), hi)
        if abs(x_new - x) <= 1e-15 * max(1.0, abs(x)):
            break
        x = x_new
    s = dp45(f, xp, sp, x, rtol, atol=rtol)
    return DualPoint(s[3], x, s[0])


def _newton(web: WebSpec, x_ref: float, t: float, z: float, p: float, rtol: float) -> DualPoint:
    dom = web.domain
    u = web.labels.inverse()(t)
    r0 = _ratio_y(web)(x_ref, z)[0]
    m1 = web.labels.inverse().derivative(t)
    x = x_ref + p / m1 / r0
    y = z - u * p / m1
    x = min(max(x, dom.x_min), dom.x_max)
    y = min(max(y, dom.y_min), dom.y_max)

    def resid(x, y):
        j = dual_jet(web, x_ref, t, (x, y), rtol)
        return np.array([j.z - z, j.z_t - p]), j

    # pull the first guess towards (x_ref, z) until its leaf reaches the reference line
    for _ in range(40):
        try:
            res, j = resid(x, y)
            break
        except DomainExitError:
            x, y = 0.5 * (x + x_ref), 0.5 * (y + z)
    else:
        raise SolverError("no admissible starting point for the elimination")
    for _ in range(NEWTON_MAX_ITER):
        if np.max(np.abs(res)) < NEWTON_TOL:
            return DualPoint(j.z_tt, x, y)
        h = NEWTON_FD_STEP
        sx = -h if x + h > dom.x_max else h
        sy = -h if y + h > dom.y_max else h
        J = np.column_stack([(resid(x + sx, y)[0] - res) / sx, (resid(x, y + sy)[0] - res) / sy])
        if abs(np.linalg.det(J)) < 1e-14:
            raise SolverError("ill-conditioned elimination Jacobian")
        dx, dy = np.linalg.solve(J, -res)
        lam = 1.0
        while True:
            xn, yn = x + lam * dx, y + lam * dy
            if dom.contains(xn, yn):
                try:
                    res, j = resid(xn, yn)
                    break
                except DomainExitError:
                    pass
            lam *= 0.5
            if lam < 1e-6:
                raise SolverError(f"Newton step leaves the domain for (t, z, p) = ({t}, {z}, {p})")
        x, y = xn, yn
    raise SolverError(f"Newton elimination did not converge for (t, z, p) = ({t}, {z}, {p})")


def solve_dual_point(web: WebSpec, x_ref: float, t: float, z: float, p: float,
                     method: str = "shooting", rtol: float = DUAL_RTOL) -> DualPoint:
    """Point ``(x, y)`` with ``Z(t; x, y) = z`` and ``Z_t = p``, and ``F = Z_tt`` there."""
    if method == "newton":
        return _newton(web, x_ref, t, z, p, rtol)
    if method != "shooting":
        raise ValueError(f"unknown method {method!r}")
    u, m1, m2 = _label_chain(web, float(t))
    pu = p / m1
    res = _shoot(web, x_ref, u, z, pu, rtol)
    return DualPoint(res.F * m1 * m1 + pu * m2, res.x, res.y)


def dual_rhs(web: WebSpec, x_ref: float, t: float, z: float, p: float,
             method: str = "shooting", rtol: float = DUAL_RTOL) -> float:
    return solve_dual_point(web, x_ref, t, z, p, method, rtol).F


# dual equations ------------------------------------------------------------------

class DualODE:
    """``z'' = F(t, z, p)``.  Jet-capable subclasses implement ``jet_coeffs``."""

    has_jets = False

    def __call__(self, t: float, z: float, p: float) -> float:
        raise NotImplementedError

    def jet_coeffs(self, alg, inputs):
        raise NotImplementedError

    def jet(self, t: float, z: float, p: float, order: int = 2) -> tuple:
        alg = algebra(3, order)
        return self.jet_coeffs(alg, alg.seed((t, z, p)))


class ExpressionDualODE(DualODE):
    has_jets = True

    def __init__(self, F: str | Expression):
        self.expression = F if isinstance(F, Expression) else parse_expression(F, ("t", "z", "p"))

    def __call__(self, t, z, p):
        return self.expression.evaluate(t, z, p)

    def jet_coeffs(self, alg, inputs):
        return self.expression.jet_coeffs(alg, inputs)


class WebDualODE(DualODE):
    """``F`` of a web, evaluated by elimination along leaves."""

    def __init__(self, web: WebSpec, x_ref: float | None = None, method: str = "shooting",
                 rtol: float = DUAL_RTOL):
        self.web = web
        self.x_ref = default_x_ref(web.domain) if x_ref is None else float(x_ref)
        self.method = method
        self.rtol = rtol

    def __call__(self, t, z, p):
        return dual_rhs(self.web, self.x_ref, t, z, p, self.method, self.rtol)


@dataclass
class TimePreservingPointTransform:
    """``z~ = psi(t, z)`` with ``psi_z != 0``; ``z_box`` brackets the inverse."""

    psi: Expression
    z_box: tuple[float, float] = (-10.0, 10.0)

    @classmethod
    def parse(cls, text: str, z_box=(-10.0, 10.0)) -> "TimePreservingPointTransform":
        return cls(parse_expression(text, ("t", "z")), tuple(z_box))

    def __call__(self, t: float, z: float) -> float:
        return self.psi.evaluate(t, z)

    def psi_z(self, t: float, z: float) -> float:
        return self.psi.jet((t, z), 1).partial(0, 1)

    def check_monotone(self, t_values, z_values) -> None:
        signs = {math.copysign(1.0, self.psi_z(t, z)) for t in t_values for z in z_values}
        if len(signs) != 1 or any(self.psi_z(t, z) == 0.0 for t in t_values for z in z_values):
            raise SingularityError("psi_z vanishes or changes sign on the sampled box")

    def inverse(self, t: float, z_tilde: float) -> float:
        lo, hi = self.z_box
        g = lambda z: self.psi.evaluate(t, z) - z_tilde
        try:
            z = brentq(g, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
        except ValueError as exc:
            raise SolverError(f"cannot invert psi at (t, z~) = ({t}, {z_tilde})") from exc
        for _ in range(3):
            j = self.psi.jet((t, z), 1)
            z -= (j.value - z_tilde) / j.partial(0, 1)
        return z


class TransformedDualODE(DualODE):
    """``F~ = psi_tt + 2 psi_tz p + psi_zz p^2 + psi_z F`` written in ``(t, z~, p~)``,
    with ``z = psi^{-1}(t, z~)`` and ``p = (p~ - psi_t) / psi_z``."""

    has_jets = True

    def __init__(self, base: DualODE, transform: TimePreservingPointTransform):
        if not base.has_jets:
            raise ValueError("point transforms need a jet-capable dual equation")
        self.base = base
        self.transform = transform

    def __call__(self, t, z, p):
        alg = algebra(3, 0)
        return self.jet_coeffs(alg, [alg.const(t), alg.const(z), alg.const(p)])[0]

    def jet_coeffs(self, alg, inputs):
        T, Zt, Pt = inputs
        t0 = T[0]
        z0 = self.transform.inverse(t0, Zt[0])
        n = alg.order
        palg = algebra(2, n + 2)
        poly = self.transform.psi.jet_coeffs(palg, palg.seed((t0, z0)))
        dt, dz = palg.derivative(poly, 0), palg.derivative(poly, 1)
        dalg, ddalg = algebra(2, n + 1), algebra(2, n)
        c = dz[0]
        # z as a jet: simplified Newton gains one order per sweep
        Z = alg.const(z0)
        for _ in range(n + 1):
            res = alg.sub(alg.compose_poly(poly, palg, (T, Z)), Zt)
            Z = alg.sub(Z, alg.scale(1.0 / c, res))
        sub = lambda q, qa: alg.compose_poly(q, qa, (T, Z))
        ps_t, ps_z = sub(dt, dalg), sub(dz, dalg)
        ps_tt = sub(dalg.derivative(dt, 0), ddalg)
        ps_tz = sub(dalg.derivative(dt, 1), ddalg)
        ps_zz = sub(dalg.derivative(dz, 1), ddalg)
        P = alg.div(alg.sub(Pt, ps_t), ps_z)
        F = self.base.jet_coeffs(alg, (T, Z, P))
        out = alg.add(ps_tt, alg.scale(2.0, alg.mul(ps_tz, P)))
        out = alg.add(out, alg.mul(ps_zz, alg.mul(P, P)))
        return alg.add(out, alg.mul(ps_z, F))


def apply_point_transform(F: DualODE, psi: TimePreservingPointTransform | str) -> TransformedDualODE:
    if isinstance(psi, str):
        psi = TimePreservingPointTransform.parse(psi)
    return TransformedDualODE(F, psi)


def apply_moebius(web: WebSpec, m: MoebiusMap) -> WebSpec:
    """Relabel so that the new foliation at ``m(t)`` is the old one at ``t``."""
    return web.with_labels(m @ web.labels)


# K0 ------------------------------------------------------------------------------

def _k0_from_partials(F, Ft, Fz, Fp, Ftp, Fzp, Fpp, p):
    return -Fz + 0.5 * (Ftp + p * Fzp + F * Fpp) - 0.25 * Fp * Fp


def k0(F: DualODE, t: float, z: float, p: float, steps: Sequence[float] = K0_FD_STEPS) -> float:
    """``K0 = -F_z + (F_tp + p F_zp + F F_pp) / 2 - F_p^2 / 4``.

    Jets when ``F`` supports them, otherwise central differences with ``steps``.
    """
    if F.has_jets:
        alg = algebra(3, 2)
        c = F.jet(t, z, p, 2)
        d = lambda *a: alg.partial(c, a)
        return _k0_from_partials(c[0], d(1, 0, 0), d(0, 1, 0), d(0, 0, 1),
                                 d(1, 0, 1), d(0, 1, 1), d(0, 0, 2), p)
    ht, hz, hp = steps
    f = lambda dt=0, dz=0, dp=0: F(t + dt * ht, z + dz * hz, p + dp * hp)
    f0, fpp_, fpm = f(), f(dp=1), f(dp=-1)
    Fp = (fpp_ - fpm) / (2 * hp)
    Fpp = (fpp_ - 2 * f0 + fpm) / hp ** 2
    Fz = (f(dz=1) - f(dz=-1)) / (2 * hz)
    Ftp = (f(1, 0, 1) - f(1, 0, -1) - f(-1, 0, 1) + f(-1, 0, -1)) / (4 * ht * hp)
    Fzp = (f(0, 1, 1) - f(0, 1, -1) - f(0, -1, 1) + f(0, -1, -1)) / (4 * hz * hp)
    return _k0_from_partials(f0, None, Fz, Fp, Ftp, Fzp, Fpp, p)


# grids -------------------------------------------------------------------------

@dataclass(frozen=True)
class QueryGrid:
    t: np.ndarray
    z: np.ndarray
    p: np.ndarray

    def points(self):
        return [(float(a), float(b), float(c)) for a in self.t for b in self.z for c in self.p]


def default_query_grid(web: WebSpec, x_ref: float | None = None, n: int = 5,
                       t_span: float = 0.3, rel: float = 0.1) -> QueryGrid:
    """Grid around the dual image of the domain centre.

    ``z`` spans ``rel`` of the height around the centre's first integral at
    ``t = 0``; ``p`` spans the same fraction around its ``Z_t`` there.
    """
    dom = web.domain
    x_ref = default_x_ref(dom) if x_ref is None else x_ref
    j = dual_jet(web, x_ref, 0.0, dom.center)
    dz = rel * dom.height
    dp = rel * max(abs(j.z_t), 1e-3)
    return QueryGrid(np.linspace(-t_span, t_span, n),
                     np.linspace(j.z - dz, j.z + dz, n),
                     np.linspace(j.z_t - dp, j.z_t + dp, n))


def k0_grid(F: DualODE, grid: QueryGrid, steps: Sequence[float] = K0_FD_STEPS) -> np.ndarray:
    return np.array([k0(F, t, z, p, steps) for t, z, p in grid.points()])
