"""Veronese webs on a coordinate rectangle.

A web is stored through a pair of functions ``(a, b)`` proportional to
``(w_x, w_y)``.  In the *base* affine parameter ``t`` the foliation ``F_t`` has
leaf direction ``V_t = b d/dx - t a d/dy`` and conormal ``t a dx + b dy``, so
``F_0 = ker dy`` and ``F_inf = ker dx``.  User-facing parameters ("labels")
are related to the base parameter by a Moebius map; a 3-web whose middle
foliation sits at label ``t2`` uses the scaling ``t -> t2 * t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import DomainExitError, OutOfDomainError, TransversalityError
from .integrate import dp45, dp45_steps
from .jetcalc import Expression, Rect, ScalarField, parse_expression
from .jetcalc.jets import algebra
from .projective import IDENTITY, MoebiusMap, ParamLike, ProjParam, affine_value, as_param

DEFAULT_TRANSVERSALITY_GRID = 64
DEFAULT_RTOL = 1e-10


@dataclass(frozen=True)
class WebSpec:
    """A planar Veronese web backed by a potential ``w`` or a coframe pair."""

    domain: Rect
    potential: Expression | None = None
    coframe: tuple[Expression, Expression] | None = None
    labels: MoebiusMap = IDENTITY
    name: str = ""
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if (self.potential is None) == (self.coframe is None):
            raise ValueError("give exactly one of potential or coframe")

    # evaluation ---------------------------------------------------------
    def _pair_fn(self, order: int) -> Callable:
        fn = self._cache.get(order)
        if fn is not None:
            return fn
        alg = algebra(2, order)
        if self.potential is not None:
            up = algebra(2, order + 1)
            w = self.potential

            def fn(x, y):
                c = w.jet_coeffs(up, up.seed((x, y)))
                return up.derivative(c, 0), up.derivative(c, 1)
        else:
            ea, eb = self.coframe
            if order == 0:
                def fn(x, y):
                    return (ea.evaluate(x, y),), (eb.evaluate(x, y),)
            else:
                def fn(x, y):
                    seed = alg.seed((x, y))
                    return ea.jet_coeffs(alg, seed), eb.jet_coeffs(alg, seed)
        self._cache[order] = fn
        return fn

    def pair_coeffs(self, x: float, y: float, order: int = 0) -> tuple[tuple, tuple]:
        """Taylor coefficients of ``(a, b)`` at ``(x, y)`` in ``algebra(2, order)``."""
        if not self.domain.contains(x, y, 1e-9):
            raise OutOfDomainError(f"point ({x!r}, {y!r}) outside {self.domain}")
        return self._pair_fn(order)(x, y)

    def pair(self, x: float, y: float) -> tuple[float, float]:
        a, b = self.pair_coeffs(x, y, 0)
        return a[0], b[0]

    def ratio_coeffs(self, x: float, y: float, order: int) -> tuple:
        """Coefficients of ``r = a / b`` (the slope factor of the leaves)."""
        alg = algebra(2, order)
        a, b = self.pair_coeffs(x, y, order)
        return alg.div(a, b)

    def base_param(self, t: ParamLike) -> float:
        """Base affine parameter of the label ``t`` (``inf`` allowed)."""
        return affine_value(self.labels.inverse()(as_param(t)))

    @property
    def t2(self) -> ProjParam:
        """Label of the foliation ``ker dw`` (base parameter 1)."""
        return self.labels(ProjParam.affine(1.0))

    def with_labels(self, labels: MoebiusMap) -> "WebSpec":
        return replace(self, labels=labels, _cache=self._cache)


class DirectionField:
    """A nowhere-zero vector field with first derivatives.

    ``fn(x, y)`` returns ``(value, jacobian)`` with ``jacobian[i, j] = d_j V^i``.
    """

    def __init__(self, fn: Callable[[float, float], tuple[np.ndarray, np.ndarray]]):
        self._fn = fn

    def jet(self, point) -> tuple[np.ndarray, np.ndarray]:
        v, jac = self._fn(float(point[0]), float(point[1]))
        return np.asarray(v, dtype=float), np.asarray(jac, dtype=float)

    def __call__(self, point) -> np.ndarray:
        v, _ = self.jet(point)
        if not np.any(v):
            raise ValueError(f"direction field vanishes at {tuple(point)}")
        return v

    @classmethod
    def constant(cls, v) -> "DirectionField":
        v = np.asarray(v, dtype=float)
        return cls(lambda x, y: (v, np.zeros((2, 2))))

    @classmethod
    def from_expressions(cls, vx: str | Expression, vy: str | Expression) -> "DirectionField":
        ex = vx if isinstance(vx, Expression) else parse_expression(vx, ("x", "y"))
        ey = vy if isinstance(vy, Expression) else parse_expression(vy, ("x", "y"))

        def fn(x, y):
            jx, jy = ex.jet((x, y), 1), ey.jet((x, y), 1)
            return (np.array([jx.value, jy.value]),
                    np.array([jx.gradient(), jy.gradient()]))
        return cls(fn)


# construction ------------------------------------------------------------

def check_transversality(web: WebSpec, n: int = DEFAULT_TRANSVERSALITY_GRID) -> None:
    """Require ``a`` and ``b`` nonzero with constant sign on an ``n`` x ``n`` grid."""
    xs, ys = web.domain.grid(n)
    signs = None
    for x in xs:
        for y in ys:
            a, b = web.pair(float(x), float(y))
            for name, v in (("w_x", a), ("w_y", b)):
                if v == 0.0:
                    raise TransversalityError(f"{name} vanishes", (float(x), float(y)))
            s = (math.copysign(1, a), math.copysign(1, b))
            if signs is None:
                signs = s
            elif s != signs:
                name = "w_x" if s[0] != signs[0] else "w_y"
                raise TransversalityError(f"{name} changes sign", (float(x), float(y)))


def _scaling_labels(t2: ParamLike) -> MoebiusMap:
    tau = affine_value(t2)
    if tau == 0.0 or math.isinf(tau):
        raise ValueError("t2 must differ from the parameters 0 and infinity")
    return MoebiusMap(tau, 0.0, 0.0, 1.0)


def from_3web(w: ScalarField | str, t2: ParamLike = 1.0, domain: Rect | None = None,
              grid: int = DEFAULT_TRANSVERSALITY_GRID, name: str = "") -> WebSpec:
    """Extend the 3-web ``{ker dx, ker dw, ker dy}`` to a Veronese web.

    The result has ``ker dy`` at label 0, ``ker dx`` at label infinity and
    ``ker dw`` at label ``t2``.
    """
    if isinstance(w, str):
        w = ScalarField.parse(w, domain if domain is not None else Rect(0.0, 1.0, 0.0, 1.0))
    elif domain is not None:
        w = ScalarField(w.expression, domain)
    web = WebSpec(w.domain, potential=w.expression, labels=_scaling_labels(t2), name=name)
    check_transversality(web, grid)
    return web


def from_coframe(a: str | Expression, b: str | Expression, domain: Rect, t2: ParamLike = 1.0,
                 grid: int = DEFAULT_TRANSVERSALITY_GRID, name: str = "") -> WebSpec:
    """Web defined by ``t a dx + b dy`` for a pair proportional to ``(w_x, w_y)``."""
    ea = a if isinstance(a, Expression) else parse_expression(a, ("x", "y"))
    eb = b if isinstance(b, Expression) else parse_expression(b, ("x", "y"))
    web = WebSpec(domain, coframe=(ea, eb), labels=_scaling_labels(t2), name=name)
    check_transversality(web, grid)
    return web


# pointwise operations ---------------------------------------------------------

def coframe(web: WebSpec, t: ParamLike, point) -> np.ndarray:
    """Conormal of ``F_t`` at ``point`` (defined up to scale)."""
    tb = web.base_param(t)
    if math.isinf(tb):
        return np.array([1.0, 0.0])
    a, b = web.pair(float(point[0]), float(point[1]))
    return np.array([tb * a, b])


def coframe_homogeneous(web: WebSpec, s: float, t: float, point) -> np.ndarray:
    """``t a dx + s b dy``: linear in the homogeneous base parameter ``(s, t)``."""
    a, b = web.pair(float(point[0]), float(point[1]))
    return np.array([t * a, s * b])


def leaf_direction(web: WebSpec, t: ParamLike, point) -> np.ndarray:
    """Tangent of the leaf of ``F_t`` through ``point``: ``(w_y, -t w_x)``."""
    tb = web.base_param(t)
    if math.isinf(tb):
        return np.array([0.0, 1.0])
    a, b = web.pair(float(point[0]), float(point[1]))
    return np.array([b, -tb * a])


def leaf_field(web: WebSpec, t: ParamLike) -> DirectionField:
    tb = web.base_param(t)
    if math.isinf(tb):
        return DirectionField.constant((0.0, 1.0))

    def fn(x, y):
        a, b = web.pair_coeffs(x, y, 1)
        return (np.array([b[0], -tb * a[0]]),
                np.array([[b[1], b[2]], [-tb * a[1], -tb * a[2]]]))
    return DirectionField(fn)


# leaves -------------------------------------------------------------------------

def _leaf_rhs(web: WebSpec, tb: float):
    dom = web.domain

    def f(x, state):
        y = state[0]
        if not dom.contains(x, y, 1e-9):
            raise DomainExitError(f"leaf left the domain at ({x:.6g}, {y:.6g})")
        a, b = web.pair(x, y)
        return [-tb * a / b]
    return f


def leaf_through(web: WebSpec, t: ParamLike, start, x_target: float, rtol: float = DEFAULT_RTOL) -> float:
    """Ordinate at ``x_target`` of the leaf of ``F_t`` through ``start``."""
    x0, y0 = float(start[0]), float(start[1])
    web.domain.require(x0, y0)
    tb = web.base_param(t)
    if math.isinf(tb):
        if x_target != x0:
            raise DomainExitError("vertical leaves never reach another abscissa")
        return y0
    return dp45(_leaf_rhs(web, tb), x0, [y0], float(x_target), rtol)[0]


def leaf_polyline(web: WebSpec, t: ParamLike, start, x_target: float,
                  rtol: float = DEFAULT_RTOL) -> np.ndarray:
    """Accepted integrator nodes ``(x, y)`` along the leaf, start included."""
    x0, y0 = float(start[0]), float(start[1])
    web.domain.require(x0, y0)
    tb = web.base_param(t)
    if math.isinf(tb):
        raise DomainExitError("vertical leaves are not graphs over x")
    pts = [(x0, y0)]
    for _, _, xn, yn in dp45_steps(_leaf_rhs(web, tb), x0, [y0], float(x_target), rtol):
        pts.append((xn, yn[0]))
    return np.array(pts)
