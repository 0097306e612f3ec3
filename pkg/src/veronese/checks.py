"""Invariant suites run by ``veronese verify``.

Each check returns a :class:`CheckRecord` with the measured residual and its
threshold.  Connection-level checks take the connection explicitly so a
perturbed connection can be substituted for fault injection.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .connection import (Connection2, covariant_derivative, curvature_rho, holonomy,
                         ricci_general, scalar_deviation, web_connection, wong_normal_form)
from .duality import (QueryGrid, WebDualODE, default_query_grid, default_x_ref, dual_jet,
                      k0, solve_dual_point)
from .errors import DomainExitError, SolverError
from .ode import (ConnectionODE, check_projective_condition, derivative_form, geodesic_ode,
                  integrate_geodesic, transformed_residuals)
from .web import WebSpec, leaf_field, leaf_through

THRESHOLDS = {
    "rho_two_path": 1e-9,
    "ricci_skew": 1e-6,
    "ricci_rho": 1e-6,
    "geodesy": 1e-9,
    "geodesy_factor": 1e-9,
    "wong_normal_form": 1e-10,
    "projective_condition": 1e-12,
    "leaf_geodesic": 1e-8,
    "parameter_elimination": 1e-8,
    "rectification": 1e-6,
    "holonomy_scalar": 1e-8,
    "dual_forward_backward": 1e-7,
    "dual_k0": 1e-3,
}


@dataclass(frozen=True)
class CheckRecord:
    name: str
    residual: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.residual < self.threshold)

    def as_dict(self) -> dict:
        return {**asdict(self), "passed": self.passed}


def _record(name: str, residual: float) -> CheckRecord:
    return CheckRecord(name, float(residual), THRESHOLDS[name])


def _points(web: WebSpec, rng: np.random.Generator, n: int, margin: float = 0.05):
    d = web.domain.inner(margin)
    return list(zip(rng.uniform(d.x_min, d.x_max, n), rng.uniform(d.y_min, d.y_max, n)))


def lambda_formula(web: WebSpec, t: float, point) -> float:
    """Factor in ``nabla_V V = lambda V`` for ``V = (b, -t a)``:
    ``(a_x b^2 - t a^2 b_y) / (a b)``, i.e. ``(w_y^2 w_xx - t w_x^2 w_yy) / (w_x w_y)``."""
    a, b = web.pair_coeffs(float(point[0]), float(point[1]), 1)
    return (a[1] * b[0] ** 2 - t * a[0] ** 2 * b[2]) / (a[0] * b[0])


def geodesy_residuals(web: WebSpec, conn: Connection2, t: float, point) -> tuple[float, float]:
    """``(|acc x V| / (max(|acc|, |V|^2) |V|), |lambda_measured - lambda_formula|)``
    for the leaf field ``V`` and ``acc = nabla_V V``.

    The ``|V|^2`` floor keeps the sine of the angle meaningful when ``acc``
    is pure roundoff (``lambda == 0``).
    """
    V = leaf_field(web, web.labels(t))
    v = V(point)
    acc = covariant_derivative(conn, V, V, point)
    na, nv = np.linalg.norm(acc), np.linalg.norm(v)
    cross = abs(acc[0] * v[1] - acc[1] * v[0]) / (max(na, nv * nv) * nv)
    lam = float(acc @ v) / nv ** 2
    lf = lambda_formula(web, t, point)
    return cross, abs(lam - lf) / max(1.0, abs(lf))


def check_rho_two_path(web, rng, n=100):
    worst = 0.0
    for p in _points(web, rng, n):
        worst = max(worst, curvature_rho(web, p, rtol=math.inf).discrepancy)
    return _record("rho_two_path", worst)


def check_ricci(web, conn, n=16):
    xs, ys = web.domain.grid(n, margin=0.02)
    skew = dev = 0.0
    for x in xs:
        for y in ys:
            ric = ricci_general(conn, (x, y))
            skew = max(skew, float(np.max(np.abs(ric + ric.T))))
            dev = max(dev, abs(ric[0, 1] - curvature_rho(web, (x, y)).formula))
    return [_record("ricci_skew", skew), _record("ricci_rho", dev)]


def check_geodesy(web, conn, rng, n_points=20, t_values=(-1.5, -0.5, 0.0, 0.3, 1.0, 2.0)):
    cross = fac = 0.0
    for t in t_values:
        for p in _points(web, rng, n_points):
            c, f = geodesy_residuals(web, conn, t, p)
            cross, fac = max(cross, c), max(fac, f)
    return [_record("geodesy", cross), _record("geodesy_factor", fac)]


def check_wong(web, rng, n=20):
    worst = 0.0
    conn = web_connection(web)
    for p in _points(web, rng, n):
        nf = wong_normal_form(web, p, tol=math.inf)
        A, B = conn.diagonal(*p)
        worst = max(worst, abs(A + nf.f_x), abs(B - nf.f_y))
    return _record("wong_normal_form", worst)


def check_projective(conn):
    return _record("projective_condition", check_projective_condition(ConnectionODE(conn)).max_abs)


def leaf_samples(web: WebSpec, rng, n: int, max_tries: int = 200):
    """``(t, start, x_end)`` whose leaves stay inside the domain up to ``x_end``."""
    out, tries = [], 0
    d = web.domain
    while len(out) < n and tries < max_tries:
        tries += 1
        x0, y0 = _points(web, rng, 1, margin=0.1)[0]
        t = float(rng.uniform(-0.6, 0.6))
        x_end = min(x0 + 0.35 * d.width, d.x_max - 0.02 * d.width)
        try:
            leaf_through(web, web.labels(t), (x0, y0), x_end)
        except DomainExitError:
            continue
        out.append((t, (x0, y0), x_end))
    return out


def check_leaf_geodesic(web, conn, rng, n=5, rtol=1e-12):
    ode = ConnectionODE(conn)
    wode = geodesic_ode(web)
    leaf_dev = elim = 0.0
    for t, (x0, y0), x_end in leaf_samples(web, rng, n):
        a, b = web.pair(x0, y0)
        p0 = -t * a / b
        xs = np.linspace(x0, x_end, 11)[1:]
        try:
            curve = integrate_geodesic(ode, x0, y0, p0, x_end, rtol=rtol, x_eval=xs)
        except DomainExitError:
            leaf_dev = math.inf
            continue
        for x, y, p in curve:
            leaf_dev = max(leaf_dev, abs(y - leaf_through(web, web.labels(t), (x0, y0), x, rtol)))
            elim = max(elim, abs(wode.slope_parameter(x, y, p) - t))
    return [_record("leaf_geodesic", leaf_dev), _record("parameter_elimination", elim)]


def check_rectification(web, rng):
    t, (x0, y0), x_end = leaf_samples(web, rng, 1)[0]
    a, b = web.pair(x0, y0)
    curve = integrate_geodesic(geodesic_ode(web), x0, y0, -t * a / b, x_end, rtol=1e-12,
                               x_eval=np.linspace(x0, x_end, 6))
    res = transformed_residuals(derivative_form(web), curve)
    return _record("rectification", float(np.max(np.abs(res))))


def check_holonomy(web, conn):
    d = web.domain
    h = 0.1 * min(d.width, d.height)
    return _record("holonomy_scalar", scalar_deviation(holonomy(conn, d.center, h)))


def check_dual_forward_backward(web, rng, x_ref=None, n=10):
    x_ref = default_x_ref(web.domain) if x_ref is None else x_ref
    worst = 0.0
    for x, y in _points(web, rng, n, margin=0.2):
        t = float(rng.uniform(-0.3, 0.3))
        try:
            j = dual_jet(web, x_ref, t, (x, y))
        except DomainExitError:
            continue
        s = solve_dual_point(web, x_ref, t, j.z, j.z_t)
        worst = max(worst, abs(s.x - x), abs(s.y - y))
    return _record("dual_forward_backward", worst)


def check_dual_k0(web, grid: QueryGrid | None = None, x_ref=None, steps=None, method="shooting"):
    F = WebDualODE(web, x_ref, method)
    grid = default_query_grid(web, F.x_ref) if grid is None else grid
    kw = {} if steps is None else {"steps": steps}
    worst = 0.0
    for q in grid.points():
        try:
            worst = max(worst, abs(k0(F, *q, **kw)))
        except SolverError:
            worst = math.inf
    return _record("dual_k0", worst)


def run_suite(web: WebSpec, conn: Connection2 | None = None, seed: int = 42,
              dual_grid: QueryGrid | None = None, x_ref=None, steps=None, include_dual: bool = True):
    conn = web_connection(web) if conn is None else conn
    rng = np.random.default_rng(seed)
    recs = [check_rho_two_path(web, rng)]
    recs += check_ricci(web, conn)
    recs += check_geodesy(web, conn, rng)
    recs.append(check_wong(web, rng))
    recs.append(check_projective(conn))
    recs += check_leaf_geodesic(web, conn, rng)
    recs.append(check_rectification(web, rng))
    recs.append(check_holonomy(web, conn))
    if include_dual:
        recs.append(check_dual_forward_backward(web, rng, x_ref))
        recs.append(check_dual_k0(web, dual_grid, x_ref, steps))
    return recs
