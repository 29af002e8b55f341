"""Kerr background geometry: horizon radii, metric in both charts,
curvature residuals, tortoise coordinate and chart transforms."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from kerrmodes import geometry
from kerrmodes.params import BL, STAR, KerrParams, SpacetimePoint, horizon_radii

from conftest import bl, fit_exponent, star

ETA = np.diag([1.0, -1.0, -1.0, -1.0])


# ---------------------------------------------------------------- parameters


def test_horizon_radii_schwarzschild():
    assert horizon_radii(KerrParams(1.0, 0.0)) == (0.0, 2.0)


def test_horizon_radii_rational_spin():
    rm, rp = horizon_radii(KerrParams(1.0, 0.6))
    assert rm == pytest.approx(0.2, abs=1e-15)
    assert rp == pytest.approx(1.8, abs=1e-15)


def test_extremal_rejected():
    with pytest.raises(ValueError, match="subextreme range required"):
        KerrParams(1.0, 1.0)
    with pytest.raises(ValueError, match="subextreme range required"):
        KerrParams(1.0, -1.2)


def test_nonpositive_mass_rejected():
    with pytest.raises(ValueError):
        KerrParams(0.0, 0.0)


@given(
    m=st.floats(0.1, 10.0),
    ratio=st.floats(-0.999, 0.999),
)
@settings(max_examples=50, deadline=None)
def test_horizon_roots_annihilate_delta(m, ratio):
    params = KerrParams(m, ratio * m)
    rm, rp = horizon_radii(params)
    assert rm < rp and rp > m
    scale = m * m
    assert abs(params.delta(rm)) <= 1e-12 * scale
    assert abs(params.delta(rp)) <= 1e-12 * scale


def test_axis_points_rejected():
    with pytest.raises(ValueError):
        SpacetimePoint(BL, 0.0, 5.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        SpacetimePoint(BL, 0.0, 5.0, math.pi, 0.0)


def test_bl_chart_requires_exterior(kerr_fast):
    inside = SpacetimePoint(BL, 0.0, 1.0, 1.0, 0.0)
    with pytest.raises(ValueError, match="r > r_"):
        geometry.metric(kerr_fast, BL).g(inside)


# -------------------------------------------------------------------- metric


def test_schwarzschild_g_tt(kerr_schw):
    field = geometry.metric(kerr_schw, BL)
    for r in (2.5, 3.0, 10.0, 250.0):
        g = field.g(bl(0.0, r, 1.1))
        assert g[0, 0] == pytest.approx(1.0 - 2.0 / r, rel=1e-14)


@pytest.mark.parametrize("chart", [BL, STAR])
def test_metric_inverse_and_volume_element(kerr_rapid, chart):
    field = geometry.metric(kerr_rapid, chart)
    mk = bl if chart is BL else star
    for r in (2.0, 3.7, 12.0, 400.0):
        for th in (0.3, 1.2, 2.8):
            pt = mk(0.0, r, th)
            g = field.g(pt)
            assert np.allclose(g, g.T, atol=1e-14)
            assert np.max(np.abs(g @ field.ginv(pt) - np.eye(4))) < 1e-12
            rho2 = kerr_rapid.rho2(r, th)
            assert field.sqrt_det(pt) == pytest.approx(
                rho2 * math.sin(th), rel=1e-10
            )


def test_star_chart_finite_at_horizon(kerr_rapid):
    field = geometry.metric(kerr_rapid, STAR)
    rp = kerr_rapid.r_plus
    for r in (rp, rp - 0.05, rp + 0.05):
        g = field.g(star(0.0, r, 0.8))
        assert np.all(np.isfinite(g))
        assert g[0, 1] == pytest.approx(-1.0, abs=1e-13)


def test_charts_agree_through_transform(kerr_fast):
    """Pulled-back Star metric must reproduce BL lengths of coordinate
    velocities transported through the transform Jacobian."""
    gbl = geometry.metric(kerr_fast, BL)
    gst = geometry.metric(kerr_fast, STAR)
    rng = np.random.default_rng(7)
    for r in (2.2, 3.3, 3.6, 5.0, 9.0):
        pt = bl(0.2, r, 1.0, 0.4)
        qt = geometry.chart_transform(kerr_fast, pt)
        h = 1e-6
        Fp = (geometry.chart_F(kerr_fast, r + h) - geometry.chart_F(kerr_fast, r - h)) / (2 * h)
        Tp = (geometry.chart_T(kerr_fast, r + h) - geometry.chart_T(kerr_fast, r - h)) / (2 * h)
        # dt* = dt + F' dr, dphi* = dphi + T' dr
        J = np.eye(4)
        J[0, 1] = Fp
        J[3, 1] = Tp
        v = rng.normal(size=4)
        w = rng.normal(size=4)
        lhs = v @ gbl.g(pt) @ w
        rhs = (J @ v) @ gst.g(qt) @ (J @ w)
        assert lhs == pytest.approx(rhs, rel=1e-8, abs=1e-8)


# ----------------------------------------------------------------- curvature


def test_flat_metric_has_zero_christoffels():
    gamma = geometry._christoffel_from(ETA, np.zeros((4, 4, 4)))
    assert np.max(np.abs(gamma)) == 0.0


@pytest.mark.parametrize("a", [0.0, 0.6, 0.9, 0.99])
def test_fd_ricci_vanishes_bl(a):
    params = KerrParams(1.0, a)
    field = geometry.metric(params, BL)
    rs = np.geomspace(1.05 * params.r_plus, 1e3, 9)
    worst = 0.0
    for r in rs:
        for th in (0.4, 1.3, 2.7):
            ric = geometry.ricci(field, bl(0.0, float(r), th), method="fd")
            worst = max(worst, float(np.max(np.abs(ric))))
    assert worst < 1e-6


def test_fd_ricci_vanishes_star(kerr_rapid):
    """Star chart including points at and inside r_+ (away from the blend
    junctions at 3m and 4m where the interpolant is only C^2)."""
    field = geometry.metric(kerr_rapid, STAR)
    rp = kerr_rapid.r_plus
    for r in (0.99 * rp, rp, 1.4, 2.0, 2.9, 5.0, 20.0):
        for th in (0.5, 1.9):
            ric = geometry.ricci(field, star(0.0, r, th), method="fd")
            assert np.max(np.abs(ric)) < 1e-6


def test_analytic_ricci_is_tighter(kerr_rapid):
    field = geometry.metric(kerr_rapid, BL)
    for r in (2.0, 7.0, 80.0):
        ric = geometry.ricci(field, bl(0.0, r, 1.0), method="analytic")
        assert np.max(np.abs(ric)) < 1e-11


def test_analytic_vs_fd_christoffel_derivatives(kerr_fast):
    field = geometry.metric(kerr_fast, BL)
    pt = bl(0.0, 4.3, 1.1)
    dg_a = geometry.dchristoffel(field, pt)
    dg_f = geometry.fd_dchristoffel(field, pt)
    assert np.max(np.abs(dg_a - dg_f)) < 1e-8


def test_metric_component_decay_exponents(kerr_rapid):
    """Large-r power laws of the BL metric: g_{t phi} = O(1/r),
    angular block O(r^2), inverse g^{t phi} = O(r^-3), g^{angular} = O(r^-2)."""
    field = geometry.metric(kerr_rapid, BL)
    rs = np.geomspace(1e2, 1e4, 12)
    th = 1.1
    comp = {k: [] for k in ("gtph", "gthth", "gphph", "itph", "ithth", "iphph")}
    for r in rs:
        pt = bl(0.0, float(r), th)
        g = field.g(pt)
        gi = field.ginv(pt)
        comp["gtph"].append(g[0, 3])
        comp["gthth"].append(g[2, 2])
        comp["gphph"].append(g[3, 3])
        comp["itph"].append(gi[0, 3])
        comp["ithth"].append(gi[2, 2])
        comp["iphph"].append(gi[3, 3])
    expected = {
        "gtph": -1.0,
        "gthth": 2.0,
        "gphph": 2.0,
        "itph": -3.0,
        "ithth": -2.0,
        "iphph": -2.0,
    }
    for key, target in expected.items():
        assert fit_exponent(rs, comp[key]) == pytest.approx(target, abs=0.05)


def test_christoffel_t_angular_decay(kerr_rapid):
    """Gamma^a_{t alpha} components fall off like r^-2."""
    field = geometry.metric(kerr_rapid, BL)
    rs = np.geomspace(1e2, 1e4, 10)
    th = 0.9
    norms = []
    for r in rs:
        gamma = geometry.christoffel(field, bl(0.0, float(r), th))
        block = np.concatenate([gamma[:, 0, 2].ravel(), gamma[:, 0, 3].ravel()])
        norms.append(np.linalg.norm(block))
    assert fit_exponent(rs, norms) == pytest.approx(-2.0, abs=0.05)


# ------------------------------------------------------------------ tortoise


def test_tortoise_normalization(kerr_fast, kerr_rapid, kerr_schw):
    for params in (kerr_fast, kerr_rapid, kerr_schw):
        assert geometry.tortoise(params, 3.0 * params.m) == pytest.approx(0.0, abs=1e-12)


def test_tortoise_schwarzschild_closed_form(kerr_schw):
    for r in (2.5, 3.0, 6.0, 40.0):
        expected = r - 3.0 + 2.0 * math.log(r - 2.0)
        assert geometry.tortoise(kerr_schw, r) == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_tortoise_against_quadrature(kerr_rapid):
    params = kerr_rapid
    for r in (2.1, 4.0, 17.0):
        val, err = quad(
            lambda s: (s * s + params.a**2) / params.delta(s), 3.0 * params.m, r
        )
        assert geometry.tortoise(params, r) == pytest.approx(val, abs=max(1e-9, 10 * err))


def test_tortoise_log_rate_at_horizon(kerr_rapid):
    params = kerr_rapid
    rp, rm = params.r_plus, params.r_minus
    rate = (rp**2 + params.a**2) / (rp - rm)
    eps = 1e-7
    diff = geometry.tortoise(params, rp + eps) - geometry.tortoise(params, rp + eps / 2)
    assert diff / math.log(2.0) == pytest.approx(rate, rel=1e-5)
    assert geometry.tortoise(params, rp + 1e-12) < -20.0


def test_tortoise_domain_error(kerr_fast):
    with pytest.raises(ValueError):
        geometry.tortoise(kerr_fast, kerr_fast.r_plus)


# ------------------------------------------------------------------- charts


def test_chart_transform_far_region(kerr_fast):
    """For r >= 4m: t* = t - r_*, phi* = phi."""
    params = kerr_fast
    for r in (4.0, 6.5, 30.0):
        pt = bl(1.5, r, 1.0, 0.7)
        qt = geometry.chart_transform(params, pt)
        assert qt.chart is STAR
        assert qt.t == pytest.approx(1.5 - geometry.tortoise(params, r), rel=1e-12)
        assert qt.phi == pytest.approx(0.7, abs=1e-13)


def test_chart_transform_inner_region(kerr_fast):
    """For r <= 3m: t* = t + r_*, phi* - phi = int a/Delta (zero at 3m)."""
    params = kerr_fast
    for r in (2.0, 2.5, 3.0):
        pt = bl(0.0, r, 1.0, 0.0)
        qt = geometry.chart_transform(params, pt)
        assert qt.t == pytest.approx(geometry.tortoise(params, r), abs=1e-12)
        val, _ = quad(lambda s: params.a / params.delta(s), 3.0 * params.m, r)
        assert qt.phi == pytest.approx(val, abs=1e-10)


def test_chart_transform_round_trip(kerr_rapid):
    for r in (2.2, 3.4, 5.0, 11.0):
        pt = bl(0.3, r, 1.4, 2.0)
        back = geometry.chart_transform(kerr_rapid, geometry.chart_transform(kerr_rapid, pt))
        assert back.chart is BL
        assert np.max(np.abs(np.array(back.coords) - np.array(pt.coords))) < 1e-12
