"""Null tetrads: normalization, metric reconstruction, spin coefficients
(with an independent finite-difference covariant-derivative oracle),
Weyl scalars and their decay."""

import math

import numpy as np
import pytest

from kerrmodes import geometry, tetrads
from kerrmodes.params import BL, KerrParams

from conftest import bl, fit_exponent

SAMPLE_POINTS = [(2.1, 0.4), (2.1, 1.3), (3.7, 0.9), (8.0, 2.4), (60.0, 1.6)]


def frames(params):
    for r, th in SAMPLE_POINTS:
        pt = bl(0.0, r, th)
        yield tetrads.kinnersley(params, pt), tetrads.normalized_tetrad(params, pt)


# --------------------------------------------------------------- normalization


def test_gram_matrix(kerr_rapid):
    """Kinnersley Gram matrix to 1e-12 absolute; the boosted frame's entries
    are scaled by the leg magnitudes (its null products carry Delta^2 eps
    rounding by construction), so its tolerance is relative."""
    target = np.zeros((4, 4), dtype=complex)
    target[0, 1] = target[1, 0] = 1.0
    target[2, 3] = target[3, 2] = -1.0
    for kin, norm in frames(kerr_rapid):
        assert np.max(np.abs(tetrads.frame_inner_products(kin) - target)) < 1e-12
        legs = [norm.l, norm.n, norm.m, norm.mbar]
        scale = np.array(
            [[max(1.0, np.max(np.abs(x)) * np.max(np.abs(y))) for y in legs] for x in legs]
        )
        err = np.abs(tetrads.frame_inner_products(norm) - target)
        assert np.max(err / scale) < 1e-12


def test_metric_reconstruction(kerr_rapid):
    field = geometry.metric(kerr_rapid, BL)
    for kin, norm in frames(kerr_rapid):
        g = field.g(kin.point)
        scale = 1.0 + np.max(np.abs(g))
        for frame in (kin, norm):
            recon = tetrads.metric_reconstruction(frame)
            assert np.max(np.abs(recon - g)) < 1e-12 * scale


def test_bl_chart_required(kerr_fast):
    from kerrmodes.params import STAR, SpacetimePoint

    with pytest.raises(ValueError):
        tetrads.kinnersley(kerr_fast, SpacetimePoint(STAR, 0.0, 5.0, 1.0, 0.0))


def test_normalized_boost_relation(kerr_rapid):
    for kin, norm in frames(kerr_rapid):
        delta = kerr_rapid.delta(kin.point.r)
        assert np.max(np.abs(norm.l - delta * kin.l)) < 1e-13 * abs(delta)
        assert np.max(np.abs(norm.n - kin.n / delta)) < 1e-13
        assert np.max(np.abs(norm.m - kin.m)) == 0.0


# ----------------------------------------------------------- spin coefficients


def test_spin_coefficient_closed_forms(kerr_rapid):
    """rho = -1/p, rho' = Delta/(2 rho_b^2 p), tau = -i a sin(th)/(sqrt2 |p|^2)."""
    params = kerr_rapid
    for kin, _ in frames(params):
        r, th = kin.point.r, kin.point.theta
        p = params.p_scalar(r, th)
        rho, rho_p, tau, tau_p = tetrads.spin_coefficients(kin)
        assert rho == pytest.approx(-1.0 / p, rel=1e-10)
        assert rho_p == pytest.approx(
            params.delta(r) / (2.0 * params.rho2(r, th) * p), rel=1e-10
        )
        assert tau == pytest.approx(
            -1j * params.a * math.sin(th) / (math.sqrt(2.0) * abs(p) ** 2), rel=1e-10
        )


def test_spin_coefficients_schwarzschild_no_rotation(kerr_schw):
    for kin, _ in frames(kerr_schw):
        _, _, tau, tau_p = tetrads.spin_coefficients(kin)
        assert abs(tau) < 1e-14
        assert abs(tau_p) < 1e-14


def test_normalized_frame_boost_weights(kerr_rapid):
    """Under l -> Delta l, n -> n/Delta: rho scales by Delta, rho' by 1/Delta,
    tau and tau' are boost-invariant."""
    for kin, norm in frames(kerr_rapid):
        delta = kerr_rapid.delta(kin.point.r)
        rk = tetrads.spin_coefficients(kin)
        rn = tetrads.spin_coefficients(norm)
        assert rn[0] == pytest.approx(delta * rk[0], rel=1e-10)
        assert rn[1] == pytest.approx(rk[1] / delta, rel=1e-10)
        assert rn[2] == pytest.approx(rk[2], rel=1e-10, abs=1e-14)
        assert rn[3] == pytest.approx(rk[3], rel=1e-10, abs=1e-14)


def _fd_covariant_derivative_lower(frame, which):
    """Oracle: nabla_b X_a with the coordinate derivative of the lowered leg
    taken by 4th-order central differences instead of the analytic chain."""
    params, pt = frame.params, frame.point
    field = frame.metric_field()
    offsets = (-2, -1, 1, 2)
    weights = (1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0)

    def lowered(r, th):
        fr = tetrads.kinnersley(params, bl(pt.t, r, th, pt.phi))
        if frame.flavor == "normalized":
            fr = tetrads.normalized_tetrad(params, bl(pt.t, r, th, pt.phi))
        low, _ = tetrads.lower_leg(fr, which)
        return low

    dlow = np.zeros((4, 4), dtype=complex)
    h = geometry.fd_step(pt.r)
    dlow[1] = sum(
        w * lowered(pt.r + off * h, pt.theta) for off, w in zip(offsets, weights)
    ) / h
    h = 1e-4
    dlow[2] = sum(
        w * lowered(pt.r, pt.theta + off * h) for off, w in zip(offsets, weights)
    ) / h
    low, _ = tetrads.lower_leg(frame, which)
    gamma = geometry.christoffel(field, pt)
    return dlow - np.einsum("cba,c->ba", gamma, low)


@pytest.mark.parametrize("which", ["l", "n", "m"])
def test_covariant_derivative_fd_oracle(kerr_rapid, which):
    for kin, _ in frames(kerr_rapid):
        exact = tetrads.covariant_derivative_lower(kin, which)
        approx = _fd_covariant_derivative_lower(kin, which)
        assert np.max(np.abs(exact - approx)) < 1e-8


def test_spin_coefficients_fd_oracle(kerr_rapid):
    """Contract the FD covariant derivatives the same way the library does."""
    for kin, _ in frames(kerr_rapid):
        nab_l = _fd_covariant_derivative_lower(kin, "l")
        nab_n = _fd_covariant_derivative_lower(kin, "n")
        m, mb, n, l = kin.m, kin.mbar, kin.n, kin.l
        oracle = (
            np.einsum("a,b,ba->", m, mb, nab_l),
            np.einsum("a,b,ba->", mb, m, nab_n),
            np.einsum("a,b,ba->", m, n, nab_l),
            np.einsum("a,b,ba->", mb, l, nab_n),
        )
        exact = tetrads.spin_coefficients(kin)
        for x, y in zip(exact, oracle):
            assert abs(x - y) < 1e-8


def test_spin_coefficient_decay(kerr_rapid):
    rs = np.geomspace(1e2, 1e4, 10)
    th = 1.0
    rho_v, tau_v = [], []
    for r in rs:
        kin = tetrads.kinnersley(kerr_rapid, bl(0.0, float(r), th))
        rho, _, tau, _ = tetrads.spin_coefficients(kin)
        rho_v.append(rho)
        tau_v.append(tau)
    assert fit_exponent(rs, rho_v) == pytest.approx(-1.0, abs=0.01)
    assert fit_exponent(rs, tau_v) == pytest.approx(-2.0, abs=0.05)
    # rho tends to -1/r from below: sign and phase
    assert rho_v[-1].real == pytest.approx(-1.0 / rs[-1], rel=1e-3)


# --------------------------------------------------------------- Weyl scalars


def test_principal_frame_weyl_scalars_vanish(kerr_rapid):
    for kin, norm in frames(kerr_rapid):
        for frame in (kin, norm):
            psi = tetrads.weyl_scalars(frame)
            for s in (0, 1, 3, 4):  # spin weights +-2, +-1
                assert abs(psi[s]) < 1e-10


def test_psi0_against_fd_weyl_oracle(kerr_rapid):
    """Contract the finite-difference Riemann (vacuum: Weyl) tensor."""
    field = geometry.metric(kerr_rapid, BL)
    for kin, _ in frames(kerr_rapid):
        W = geometry.riemann_lower(field, kin.point, method="fd")
        oracle = np.einsum(
            "abcd,a,b,c,d->", W, kin.l, kin.m, kin.mbar, kin.n
        )
        assert abs(tetrads.background_psi0(kin) - oracle) < 1e-8


def test_psi0_boost_invariance(kerr_rapid):
    """Psi_0 has spin and boost weight zero: identical in both frames."""
    for kin, norm in frames(kerr_rapid):
        assert tetrads.background_psi0(kin) == pytest.approx(
            tetrads.background_psi0(norm), rel=1e-10
        )


def test_psi0_decay(kerr_rapid):
    rs = np.geomspace(1e2, 1e4, 10)
    th = 0.8
    vals = [
        tetrads.background_psi0(tetrads.kinnersley(kerr_rapid, bl(0.0, float(r), th)))
        for r in rs
    ]
    assert fit_exponent(rs, vals) == pytest.approx(-3.0, abs=0.05)
    assert fit_exponent(rs, [v.imag for v in vals]) == pytest.approx(-4.0, abs=0.05)
