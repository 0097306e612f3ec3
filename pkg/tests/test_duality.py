import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from veronese.connection import constant_curvature_web
from veronese.duality import (ExpressionDualODE, MoebiusMap, TimePreservingPointTransform, WebDualODE,
                              apply_moebius, apply_point_transform, default_query_grid, dual_curve,
                              dual_jet, dual_rhs, first_integral, k0, k0_grid, solve_dual_point)
from veronese.errors import SolverError
from veronese.web import coframe, leaf_direction


def test_first_integral_flat(flat):
    for t, (x, y) in [(0.5, (0.4, 0.2)), (-1.0, (0.3, -0.1))]:
        assert first_integral(flat, 0.0, t, (x, y)) == pytest.approx(y + t * x, abs=1e-12)


def test_first_integral_on_reference_line(curved):
    assert first_integral(curved, 0.2, 0.7, (0.2, 0.35)) == 0.35
    # leaves of F_0 are horizontal
    assert first_integral(curved, -0.5, 0.0, (0.6, 0.35)) == pytest.approx(0.35, abs=1e-14)


def test_dual_curve_flat_is_affine(flat):
    ts = np.linspace(-0.5, 0.5, 7)
    z = dual_curve(flat, -0.8, (0.3, 0.1), ts)
    assert z == pytest.approx(0.1 + ts * 1.1, abs=1e-12)


def test_dual_curve_smooth(curved):
    ts = np.linspace(-0.4, 0.4, 41)
    z = dual_curve(curved, -0.8, (0.2, 0.1), ts)
    second = np.diff(z, 2) / (ts[1] - ts[0]) ** 2
    assert np.all(np.isfinite(second)) and np.max(np.abs(second)) < 10
    # the forward variational system agrees with the difference quotient
    j = dual_jet(curved, -0.8, 0.0, (0.2, 0.1))
    assert second[19] == pytest.approx(j.z_tt, abs=1e-4)


def test_dual_jet_against_differences(curved):
    h = 1e-4
    zp = first_integral(curved, -0.8, 0.3 + h, (0.4, -0.2))
    zm = first_integral(curved, -0.8, 0.3 - h, (0.4, -0.2))
    j = dual_jet(curved, -0.8, 0.3, (0.4, -0.2))
    assert j.z_t == pytest.approx((zp - zm) / (2 * h), rel=1e-7)


def test_flat_dual_vanishes(flat):
    F = WebDualODE(flat)
    for q in default_query_grid(flat).points():
        assert abs(F(*q)) < 1e-6


@given(st.floats(-0.3, 0.3), st.floats(-0.4, 0.6), st.floats(-0.6, 0.6))
def test_forward_backward(t, x, y):
    web = constant_curvature_web(1.0)
    j = dual_jet(web, -0.8, t, (x, y))
    s = solve_dual_point(web, -0.8, t, j.z, j.z_t)
    assert (s.x, s.y) == (pytest.approx(x, abs=1e-7), pytest.approx(y, abs=1e-7))
    assert s.F == pytest.approx(j.z_tt, abs=1e-8)


def test_newton_matches_shooting(curved):
    j = dual_jet(curved, -0.8, 0.2, (0.1, 0.3))
    a = solve_dual_point(curved, -0.8, 0.2, j.z, j.z_t, method="shooting")
    b = solve_dual_point(curved, -0.8, 0.2, j.z, j.z_t, method="newton")
    assert b.F == pytest.approx(a.F, abs=1e-7)
    assert (b.x, b.y) == (pytest.approx(a.x, abs=1e-7), pytest.approx(a.y, abs=1e-7))


def test_out_of_image(curved):
    with pytest.raises(SolverError):
        dual_rhs(curved, -0.8, 0.2, 0.0, 50.0)
    with pytest.raises(SolverError):
        dual_rhs(curved, -0.8, 0.2, 3.0, 0.5)


def test_k0_unit_identities():
    for text, want in [("0", 0.0), ("z", -1.0), ("p^2", 0.0)]:
        F = ExpressionDualODE(text)
        for q in [(0.1, 0.2, 0.3), (-1.0, 2.0, 5.0)]:
            assert k0(F, *q) == want


def test_k0_fd_matches_jets():
    F = ExpressionDualODE("sin(t)*z + p^2*z/3 + exp(p/2)")

    class Opaque(ExpressionDualODE):
        has_jets = False

    G = Opaque(F.expression)
    assert k0(G, 0.2, 0.1, 0.4) == pytest.approx(k0(F, 0.2, 0.1, 0.4), abs=1e-4)


def test_exp_transform_oracle():
    T = apply_point_transform(ExpressionDualODE("0"), "exp(z)")
    for t, z, p in [(0.3, 1.5, 0.7), (-1.0, 0.2, -2.0)]:
        assert T(t, z, p) == pytest.approx(p * p / z, rel=1e-12)
        assert abs(k0(T, t, z, p)) < 1e-12


def test_identity_and_shift_transforms():
    F = ExpressionDualODE("z*p + t")
    I = apply_point_transform(F, "z")
    assert I(0.3, 0.5, 0.7) == pytest.approx(F(0.3, 0.5, 0.7))
    S = apply_point_transform(ExpressionDualODE("0"), "z + 2")
    assert S(0.3, 0.5, 0.7) == 0.0


psi_coeffs = st.tuples(st.floats(0.6, 1.5), st.floats(0, 0.5), st.floats(-0.4, 0.4),
                       st.floats(0, 0.5), st.floats(-1, 1))


@given(psi_coeffs)
def test_k0_vanishing_preserved(c):
    c1, c2, c3, c4, c5 = c
    psi = TimePreservingPointTransform.parse(f"{c1}*z + {c2}*z^3 + {c3}*sin(t)*z + {c4}*exp(z/2) + {c5}*t^2")
    psi.check_monotone(np.linspace(-0.5, 0.5, 5), np.linspace(-1, 1, 9))
    T = apply_point_transform(ExpressionDualODE("p^2"), psi)
    for t, z, p in [(-0.3, -0.5, -1.0), (0.2, 0.4, 0.6), (0.0, 0.0, 0.0)]:
        assert abs(k0(T, t, z, p)) < 1e-9


@given(psi_coeffs)
def test_k0_value_preserved_under_point_transforms(c):
    c1, c2, c3, c4, c5 = c
    psi = TimePreservingPointTransform.parse(f"{c1}*z + {c2}*z^3 + {c3}*sin(t)*z + {c4}*exp(z/2) + {c5}*t^2")
    T = apply_point_transform(ExpressionDualODE("z"), psi)
    assert k0(T, 0.2, 0.4, 0.6) == pytest.approx(-1.0, abs=1e-9)


def test_non_monotone_psi_rejected():
    psi = TimePreservingPointTransform.parse("z^2")
    with pytest.raises(Exception):
        psi.check_monotone([0.0], [-1.0, 1.0])


def test_moebius_relabelling(flat):
    assert apply_moebius(flat, MoebiusMap()) == flat
    inv = apply_moebius(flat, MoebiusMap(0.0, 1.0, 1.0, 0.0))
    # t -> 1/t swaps ker dx and ker dy
    assert list(leaf_direction(inv, 0.0, (0.1, 0.2))) == [0.0, 1.0]
    assert list(coframe(inv, math.inf, (0.1, 0.2))) == pytest.approx([0.0, 1.0])
    scaled = apply_moebius(flat, MoebiusMap(2.0, 0.0, 0.0, 1.0))
    rng = np.random.default_rng(3)
    for x, y, s in rng.uniform(-0.9, 0.9, (20, 3)):
        d_new = leaf_direction(scaled, 2 * s, (x, y))
        d_old = leaf_direction(flat, s, (x, y))
        assert d_new[0] * d_old[1] - d_new[1] * d_old[0] == pytest.approx(0.0, abs=1e-14)


def test_moebius_dual(flat):
    affine = apply_moebius(flat, MoebiusMap(2.0, 0.5, 0.0, 1.0))
    F = WebDualODE(affine)
    assert max(abs(F(*q)) for q in default_query_grid(affine).points()) < 1e-9
    # a genuine Moebius map bends the dual curves but keeps K0 = 0
    proj = apply_moebius(flat, MoebiusMap(1.0, 0.3, 0.2, 1.0))
    G = WebDualODE(proj)
    assert np.max(np.abs(k0_grid(G, default_query_grid(proj, n=3)))) < 1e-5
