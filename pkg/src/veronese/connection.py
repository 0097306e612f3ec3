"""Torsion-free connections on the plane: the web connection, curvature,
parallel transport, and the reconstruction of a web from a connection whose
Ricci tensor is skew-symmetric.

Index conventions: ``G[i, j, k]`` is ``Gamma^i_jk`` with ``nabla_{d_j} d_k =
Gamma^i_jk d_i``; ``dG[i, j, k, l] = d_l Gamma^i_jk``.  The curvature is
``R(d_k, d_l) d_j = R^i_jkl d_i`` and ``Ric_jk = R^i_jik``, which makes the
Ricci matrix of a web connection ``[[0, rho], [-rho, 0]]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ConsistencyError, DomainExitError, NonSkewRicciError
from .integrate import dp45
from .jetcalc import Expression, Rect, parse_expression
from .jetcalc.jets import algebra
from .web import DEFAULT_RTOL, DirectionField, WebSpec, from_coframe

# independent components of a symmetric connection, in storage order
COMPONENTS = ((0, 0, 0), (0, 0, 1), (0, 1, 1), (1, 0, 0), (1, 0, 1), (1, 1, 1))
COMPONENT_NAMES = ("G^x_xx", "G^x_xy", "G^x_yy", "G^y_xx", "G^y_xy", "G^y_yy")


def _symmetric(values: Sequence[float]) -> np.ndarray:
    G = np.zeros((2, 2, 2))
    for (i, j, k), v in zip(COMPONENTS, values):
        G[i, j, k] = G[i, k, j] = v
    return G


class Connection2:
    """Symmetric connection on a rectangle; subclasses supply the six fields."""

    domain: Rect

    def components(self, x: float, y: float) -> tuple[float, ...]:
        raise NotImplementedError

    def component_jets(self, x: float, y: float):
        """Six ``(value, d_x, d_y)`` triples, or ``None`` when unavailable."""
        return None

    def christoffel(self, x: float, y: float) -> np.ndarray:
        return _symmetric(self.components(x, y))

    def christoffel_jet(self, x: float, y: float):
        jets = self.component_jets(x, y)
        if jets is None:
            return None
        G = _symmetric([j[0] for j in jets])
        dG = np.zeros((2, 2, 2, 2))
        for (i, j, k), jet in zip(COMPONENTS, jets):
            dG[i, j, k, :] = dG[i, k, j, :] = (jet[1], jet[2])
        return G, dG


class ExpressionConnection(Connection2):
    """Six expression-backed Christoffel fields (keys from :data:`COMPONENT_NAMES`,
    missing ones are zero)."""

    def __init__(self, fields: dict[str, str | Expression], domain: Rect):
        self.domain = domain
        unknown = set(fields) - set(COMPONENT_NAMES)
        if unknown:
            raise ValueError(f"unknown components {sorted(unknown)}")
        self.fields = [
            None if fields.get(n) is None else
            (fields[n] if isinstance(fields[n], Expression) else parse_expression(fields[n], ("x", "y")))
            for n in COMPONENT_NAMES
        ]

    def components(self, x, y):
        return tuple(0.0 if e is None else e.evaluate(x, y) for e in self.fields)

    def component_jets(self, x, y):
        out = []
        for e in self.fields:
            if e is None:
                out.append((0.0, 0.0, 0.0))
            else:
                j = e.jet((x, y), 1)
                out.append((j.value, j.partial(1, 0), j.partial(0, 1)))
        return out


class FunctionConnection(Connection2):
    """Values only: ``fn(x, y)`` returns the six components."""

    def __init__(self, fn: Callable[[float, float], Sequence[float]], domain: Rect):
        self.fn = fn
        self.domain = domain

    def components(self, x, y):
        return tuple(self.fn(x, y))


class WebConnection(Connection2):
    """The web connection: only ``G^x_xx`` and ``G^y_yy`` are nonzero.

    With ``(a, b)`` proportional to ``(w_x, w_y)``::

        G^x_xx = a_x/a - b_x/b = (w_y w_xx - w_x w_xy) / (w_x w_y)
        G^y_yy = b_y/b - a_y/a = (w_x w_yy - w_y w_xy) / (w_x w_y)
    """

    def __init__(self, web: WebSpec):
        self.web = web
        self.domain = web.domain

    def diagonal(self, x, y) -> tuple[float, float]:
        a, b = self.web.pair_coeffs(x, y, 1)
        return a[1] / a[0] - b[1] / b[0], b[2] / b[0] - a[2] / a[0]

    def diagonal_jets(self, x, y):
        """``(A, A_x, A_y), (B, B_x, B_y)`` for ``A = G^x_xx``, ``B = G^y_yy``."""
        alg = algebra(2, 2)
        a, b = self.web.pair_coeffs(x, y, 2)
        la, lb = alg.log(_abs(a)), alg.log(_abs(b))
        dla_x, dlb_x = alg.derivative(la, 0), alg.derivative(lb, 0)
        dla_y, dlb_y = alg.derivative(la, 1), alg.derivative(lb, 1)
        A = tuple(p - q for p, q in zip(dla_x, dlb_x))
        B = tuple(p - q for p, q in zip(dlb_y, dla_y))
        return (A[0], A[1], A[2]), (B[0], B[1], B[2])

    def components(self, x, y):
        A, B = self.diagonal(x, y)
        return (A, 0.0, 0.0, 0.0, 0.0, B)

    def component_jets(self, x, y):
        A, B = self.diagonal_jets(x, y)
        z = (0.0, 0.0, 0.0)
        return [A, z, z, z, z, B]


def _abs(c: tuple) -> tuple:
    return c if c[0] > 0 else tuple(-v for v in c)


class PerturbedConnection(Connection2):
    """Adds ``eps`` to ``G^x_xy = G^x_yx``; used for fault injection."""

    def __init__(self, base: Connection2, eps: float):
        self.base = base
        self.eps = eps
        self.domain = base.domain

    def components(self, x, y):
        c = list(self.base.components(x, y))
        c[1] += self.eps
        return tuple(c)

    def component_jets(self, x, y):
        jets = self.base.component_jets(x, y)
        if jets is None:
            return None
        jets = list(jets)
        v, dx, dy = jets[1]
        jets[1] = (v + self.eps, dx, dy)
        return jets


def web_connection(web: WebSpec) -> WebConnection:
    return WebConnection(web)


# curvature -------------------------------------------------------------------

class RhoPair(NamedTuple):
    formula: float   # closed-form expression in the partials of (a, b)
    compact: float   # d_x d_y ln|b / a| through jet composition
    terms: tuple = ()

    @property
    def discrepancy(self) -> float:
        """``|formula - compact|`` over :func:`rho_scale`."""
        return abs(self.formula - self.compact) / rho_scale(self.formula, self.compact, self.terms)


def rho_scale(formula: float, compact: float, terms) -> float:
    """Mixed scale for comparing the two routes: relative for large values,
    absolute (unit) near ``rho == 0``."""
    return max(1.0, abs(formula), abs(compact), sum(abs(t) for t in terms))


def curvature_rho(web: WebSpec, point, rtol: float = 1e-9) -> RhoPair:
    """Scalar curvature ``rho`` with ``R(d_x, d_y) V = rho V``, by two routes.

    The formula route is, for ``(a, b) = (w_x, w_y)``::

        rho = w_xx w_xy / w_x^2 - w_yy w_xy / w_y^2 - w_xxy / w_x + w_xyy / w_y
    """
    x, y = float(point[0]), float(point[1])
    alg = algebra(2, 2)
    a, b = web.pair_coeffs(x, y, 2)
    p = lambda c, i, j: alg.partial(c, (i, j))
    a0, b0 = a[0], b[0]
    terms = (
        p(a, 1, 0) * p(a, 0, 1) / a0 ** 2,
        -p(b, 1, 0) * p(b, 0, 1) / b0 ** 2,
        -p(a, 1, 1) / a0,
        p(b, 1, 1) / b0,
    )
    formula = sum(terms)
    f = alg.log(_abs(alg.div(b, a)))
    compact = alg.partial(f, (1, 1))
    if abs(formula - compact) > rtol * rho_scale(formula, compact, terms):
        raise ConsistencyError(f"rho routes disagree at {point}: {formula!r} vs {compact!r}")
    return RhoPair(formula, compact, terms)


def _fd_christoffel_jet(conn: Connection2, x: float, y: float, h: float):
    G = conn.christoffel(x, y)
    dG = np.zeros((2, 2, 2, 2))
    dG[..., 0] = (conn.christoffel(x + h, y) - conn.christoffel(x - h, y)) / (2 * h)
    dG[..., 1] = (conn.christoffel(x, y + h) - conn.christoffel(x, y - h)) / (2 * h)
    return G, dG


def christoffel_with_derivatives(conn: Connection2, point, fd_step: float = 1e-5):
    x, y = float(point[0]), float(point[1])
    jet = conn.christoffel_jet(x, y)
    return jet if jet is not None else _fd_christoffel_jet(conn, x, y, fd_step)


def riemann(conn: Connection2, point, fd_step: float = 1e-5) -> np.ndarray:
    """``R[i, j, k, l] = R^i_jkl``."""
    G, dG = christoffel_with_derivatives(conn, point, fd_step)
    # d_k G^i_lj - d_l G^i_kj + G^i_km G^m_lj - G^i_lm G^m_kj
    dterm = np.einsum("iljk->ijkl", dG) - np.einsum("ikjl->ijkl", dG)
    qterm = np.einsum("ikm,mlj->ijkl", G, G) - np.einsum("ilm,mkj->ijkl", G, G)
    return dterm + qterm


def ricci_general(conn: Connection2, point, fd_step: float = 1e-5) -> np.ndarray:
    """Ricci matrix ``Ric_jk = R^i_jik``; first partials of the Christoffel
    symbols come from jets when available, else central differences."""
    return np.einsum("ijik->jk", riemann(conn, point, fd_step))


@dataclass(frozen=True)
class CurvatureReport:
    rho: float
    ricci: np.ndarray
    point: tuple[float, float]


def curvature_report(web: WebSpec, point) -> CurvatureReport:
    rho = curvature_rho(web, point).formula
    return CurvatureReport(rho, ricci_general(web_connection(web), point),
                           (float(point[0]), float(point[1])))


def ricci_skewness(conn: Connection2, points, fd_step: float = 1e-5) -> float:
    """Largest ``|Ric + Ric^T|`` entry over ``points``."""
    worst = 0.0
    for p in points:
        ric = ricci_general(conn, p, fd_step)
        worst = max(worst, float(np.max(np.abs(ric + ric.T))))
    return worst


# covariant derivative and transport ---------------------------------------------

def covariant_derivative(conn: Connection2, V: DirectionField, W: DirectionField, point) -> np.ndarray:
    """``(nabla_V W)^i = V^j d_j W^i + G^i_jk V^j W^k``."""
    v, _ = V.jet(point)
    w, jw = W.jet(point)
    G = conn.christoffel(float(point[0]), float(point[1]))
    return jw @ v + np.einsum("ijk,j,k->i", G, v, w)


def _segment_rhs(conn: Connection2, p0, p1):
    p0 = np.asarray(p0, float)
    d = np.asarray(p1, float) - p0
    dx, dy = float(d[0]), float(d[1])
    dom = conn.domain

    def f(s, st):
        x, y = float(p0[0]) + s * dx, float(p0[1]) + s * dy
        if not dom.contains(x, y, 1e-9):
            raise DomainExitError(f"transport path left the domain at ({x:.6g}, {y:.6g})")
        c = conn.components(x, y)
        # M^i_k = G^i_jk gamma'^j
        m00 = c[0] * dx + c[1] * dy
        m01 = c[1] * dx + c[2] * dy
        m10 = c[3] * dx + c[4] * dy
        m11 = c[4] * dx + c[5] * dy
        return [-(m00 * st[0] + m01 * st[1]), -(m10 * st[0] + m11 * st[1]),
                -(m00 * st[2] + m01 * st[3]), -(m10 * st[2] + m11 * st[3])]
    return f


def parallel_transport(conn: Connection2, frame, path, rtol: float = DEFAULT_RTOL) -> np.ndarray:
    """Transport the columns of ``frame`` along the polyline ``path``."""
    frame = np.asarray(frame, dtype=float)
    path = [tuple(map(float, p)) for p in path]
    for p in path:
        if not conn.domain.contains(*p):
            raise DomainExitError(f"path vertex {p} outside the domain")
    st = [frame[0, 0], frame[1, 0], frame[0, 1], frame[1, 1]]
    for p0, p1 in zip(path[:-1], path[1:]):
        st = dp45(_segment_rhs(conn, p0, p1), 0.0, st, 1.0, rtol, atol=rtol * 1e-2)
    return np.array([[st[0], st[2]], [st[1], st[3]]])


def square_loop(center, h: float) -> list[tuple[float, float]]:
    cx, cy = float(center[0]), float(center[1])
    r = 0.5 * h
    return [(cx - r, cy - r), (cx + r, cy - r), (cx + r, cy + r), (cx - r, cy + r), (cx - r, cy - r)]


def holonomy(conn: Connection2, center, h: float, rtol: float = 1e-12) -> np.ndarray:
    """Transport of the identity frame around a counter-clockwise square of side ``h``
    starting at its lower-left corner."""
    return parallel_transport(conn, np.eye(2), square_loop(center, h), rtol)


def scalar_deviation(M: np.ndarray) -> float:
    """``|M - (tr M / 2) I| / |tr M / 2|``: zero iff ``M`` is a scalar matrix."""
    c = 0.5 * np.trace(M)
    return float(np.linalg.norm(M - c * np.eye(2)) / abs(c))


# reconstruction of the web ------------------------------------------------------

class ReconstructedWeb:
    """Frame field obtained by transporting ``frame0`` from ``basepoint``.

    ``frame(q)`` returns the matrix with columns ``X(q), Y(q)``; the leaves of
    the reconstructed foliation ``F_t`` are the integral curves of ``X + tY``.
    """

    def __init__(self, conn: Connection2, basepoint, frame0, rtol: float = 1e-12):
        self.conn = conn
        self.basepoint = (float(basepoint[0]), float(basepoint[1]))
        self.frame0 = np.asarray(frame0, dtype=float)
        if abs(np.linalg.det(self.frame0)) == 0.0:
            raise ValueError("initial frame is singular")
        self.rtol = rtol

    def path(self, q, kind: str = "L") -> list[tuple[float, float]]:
        bx, by = self.basepoint
        qx, qy = float(q[0]), float(q[1])
        corner = (qx, by) if kind == "L" else (bx, qy)
        return [self.basepoint, corner, (qx, qy)]

    def frame(self, q, kind: str = "L") -> np.ndarray:
        return parallel_transport(self.conn, self.frame0, self.path(q, kind), self.rtol)

    def direction(self, t: float, q, kind: str = "L") -> np.ndarray:
        F = self.frame(q, kind)
        return F[:, 0] + t * F[:, 1]

    def direction_field(self, t: float, fd_step: float = 1e-4) -> DirectionField:
        """``X + tY`` with first derivatives by central differences."""
        def fn(x, y):
            v = self.direction(t, (x, y))
            jac = np.empty((2, 2))
            jac[:, 0] = (self.direction(t, (x + fd_step, y)) - self.direction(t, (x - fd_step, y))) / (2 * fd_step)
            jac[:, 1] = (self.direction(t, (x, y + fd_step)) - self.direction(t, (x, y - fd_step))) / (2 * fd_step)
            return v, jac
        return DirectionField(fn)

    def geodesic_residual(self, t: float, q, fd_step: float = 1e-4) -> float:
        """``|nabla_V V x V| / |V|^3`` for ``V = X + tY`` (coordinate geodesic curvature)."""
        V = self.direction_field(t, fd_step)
        acc = covariant_derivative(self.conn, V, V, q)
        v = V(q)
        return float(abs(acc[0] * v[1] - acc[1] * v[0]) / np.linalg.norm(v) ** 3)

    def path_change(self, q) -> np.ndarray:
        """Matrix ``M`` with ``frame_alt = frame_L @ M``; a positive scalar multiple of I."""
        return np.linalg.solve(self.frame(q, "L"), self.frame(q, "alt"))


def connection_to_web(conn: Connection2, basepoint, frame0=None, grid: int = 16,
                      skew_tol: float = 1e-6, fd_step: float = 1e-5, rtol: float = 1e-12) -> ReconstructedWeb:
    """Rebuild the web of a torsion-free connection with skew-symmetric Ricci tensor."""
    xs, ys = conn.domain.grid(grid, margin=0.02)
    skew = ricci_skewness(conn, [(x, y) for x in xs for y in ys], fd_step)
    if skew > skew_tol:
        raise NonSkewRicciError(f"Ricci tensor is not skew-symmetric: |Ric + Ric^T| = {skew:.3g}")
    return ReconstructedWeb(conn, basepoint, np.eye(2) if frame0 is None else frame0, rtol)


# normal forms -------------------------------------------------------------------

class WongNormalForm(NamedTuple):
    f: float
    f_x: float
    f_y: float


def wong_normal_form(web: WebSpec, point, tol: float = 1e-10) -> WongNormalForm:
    """``f = ln|w_y / w_x|`` with ``G^x_xx = -f_x`` and ``G^y_yy = f_y``.

    The sign of ``w_y / w_x`` is constant on a transverse web, so taking the
    absolute value fixes one branch of the logarithm for the whole domain.
    """
    x, y = float(point[0]), float(point[1])
    alg = algebra(2, 1)
    a, b = web.pair_coeffs(x, y, 1)
    f = alg.log(_abs(alg.div(b, a)))
    nf = WongNormalForm(f[0], f[1], f[2])
    A, B = WebConnection(web).diagonal(x, y)
    if abs(A + nf.f_x) > tol * max(1.0, abs(A)) or abs(B - nf.f_y) > tol * max(1.0, abs(B)):
        raise ConsistencyError(f"normal form mismatch at {point}")
    return nf


def constant_curvature_web(C: float, domain: Rect = Rect(-1.0, 1.0, -1.0, 1.0), grid: int = 64) -> WebSpec:
    """Web of ``dx + t exp(C x y) dy``, whose connection has ``rho == C``.

    Stored as the coframe pair ``(1, exp(Cxy))``: no potential ``w`` is needed.
    """
    C = float(C)
    b = f"exp({C!r}*x*y)" if C >= 0 else f"exp(-{-C!r}*x*y)"
    return from_coframe("1.0", b, domain, grid=grid, name=f"constant_curvature:{C:g}")
