"""Spin-weighted sphere calculus: grid quadrature, harmonics, edth ladder,
tensor harmonics and the spheroidal angular operator."""

import numpy as np
import pytest
from scipy.special import sph_harm_y

from kerrmodes import sphere as sp
from kerrmodes.params import KerrParams

GRID = sp.SphericalGrid(32, 64)


# ---------------------------------------------------------------------- grid


def test_grid_area():
    assert abs(GRID.integrate(np.ones((32, 64))) - 4.0 * np.pi) < 1e-13


def test_grid_polynomial_exactness():
    """Gauss quadrature in cos(theta) is exact through degree 2N-1."""
    x = np.cos(GRID.theta)
    for deg in (5, 20, 2 * 32 - 1):
        vals = np.repeat((x**deg)[:, None], 64, axis=1)
        exact = 2.0 * np.pi * (1.0 - (-1.0) ** (deg + 1)) / (deg + 1)
        assert GRID.integrate(vals) == pytest.approx(exact, abs=1e-12)


def test_grid_nodes_interior():
    th = GRID.theta
    assert np.all(th > 0.0) and np.all(th < np.pi)
    assert np.all(np.diff(th) > 0)


# ----------------------------------------------------------------- harmonics


def test_s0_matches_classical():
    TH, PH = np.meshgrid(GRID.theta, GRID.phi, indexing="ij")
    for l, m in [(0, 0), (1, 0), (1, 1), (2, -1), (3, 2), (5, -4), (8, 8)]:
        mine = sp.sw_harmonic(0, l, m, GRID).values
        ref = sph_harm_y(l, m, TH, PH)
        assert np.max(np.abs(mine - ref)) < 1e-12


@pytest.mark.parametrize("s", [-2, -1, 0, 1, 2])
def test_orthonormality(s):
    basis = [
        sp.sw_harmonic(s, l, m, GRID).values
        for l in range(abs(s), 9)
        for m in range(-l, l + 1)
    ]
    stack = np.array(basis)
    gram = (2.0 * np.pi / GRID.n_phi) * np.einsum(
        "aij,i,bij->ab", np.conj(stack), GRID.weights, stack
    )
    assert np.max(np.abs(gram - np.eye(len(basis)))) < 1e-10


def test_sw_harmonic_domain_error():
    with pytest.raises(ValueError):
        sp.sw_harmonic(2, 1, 0, GRID)
    with pytest.raises(ValueError):
        sp.sw_harmonic(0, 2, 3, GRID)


def test_sw_eigenvalue_examples():
    assert sp.sw_eigenvalue(2, 2) == 0
    assert sp.sw_eigenvalue(0, 1) == 2
    assert sp.sw_eigenvalue(-2, 3) == 10
    assert isinstance(sp.sw_eigenvalue(1, 4), int)


def test_eth_annihilates_constant():
    out = sp.eth(sp.sw_harmonic(0, 0, 0, GRID))
    assert np.max(np.abs(out.values)) < 1e-11


def test_ladder_eigen_relation_all_sl():
    """-2 eth' eth Y^[s]_{lm} = (l(l+1) - s(s+1)) Y^[s]_{lm}, |s| <= 2, l <= 8."""
    for s in range(-2, 3):
        for l in range(abs(s), 9):
            for m in range(-l, l + 1, max(1, l)):
                Y = sp.sw_harmonic(s, l, m, GRID)
                lap = sp.minus_sw_laplacian_s(Y)
                resid = np.max(np.abs(lap.values - sp.sw_eigenvalue(s, l) * Y.values))
                assert resid < 1e-8


def test_commutator_identity():
    """-eth eth' = -eth' eth + s on basis elements."""
    for s in range(-2, 3):
        for l, m in [(abs(s), 0), (4, 2), (6, -3)]:
            Y = sp.sw_harmonic(s, l, m, GRID)
            lhs = sp.eth(sp.eth_prime(Y)).values
            rhs = sp.eth_prime(sp.eth(Y)).values - s * Y.values
            assert np.max(np.abs(lhs - rhs)) < 1e-9


@pytest.mark.parametrize("s,l,m", [(0, 3, 2), (1, 3, 2), (-1, 3, 1), (2, 4, 1), (-2, 5, -2)])
def test_eth_pointwise_form(s, l, m):
    """The spectral ladder agrees with the displayed differential operators
    (1/sqrt2)(d_theta -+ (m/sin) -+ s cot) acting on the theta-profiles."""
    th = GRID.theta
    eps = 1e-6
    dth = (
        sp.sw_theta_function(s, l, m, th + eps) - sp.sw_theta_function(s, l, m, th - eps)
    ) / (2 * eps)
    S = sp.sw_theta_function(s, l, m, th)
    up = (dth - (m / np.sin(th)) * S - s * S / np.tan(th)) / np.sqrt(2.0)
    dn = (dth + (m / np.sin(th)) * S + s * S / np.tan(th)) / np.sqrt(2.0)
    assert np.max(
        np.abs(up - np.sqrt((l - s) * (l + s + 1) / 2.0) * sp.sw_theta_function(s + 1, l, m, th))
    ) < 1e-8
    assert np.max(
        np.abs(dn + np.sqrt((l + s) * (l - s + 1) / 2.0) * sp.sw_theta_function(s - 1, l, m, th))
    ) < 1e-8


def test_round_trip_random_band_limited():
    rng = np.random.default_rng(11)
    for s in (-2, 0, 1):
        coeffs = np.zeros((9, 17), dtype=complex)
        for l in range(abs(s), 9):
            for m in range(-l, l + 1):
                coeffs[l, m + 8] = rng.normal() + 1j * rng.normal()
        fld = sp.reconstruct(s, coeffs, GRID)
        back = sp.decompose(fld, lmax=8)
        assert np.max(np.abs(back[:9, 8 - 8 : 8 + 9] - coeffs)) < 1e-10
        again = sp.reconstruct(s, back, GRID)
        assert np.max(np.abs(again.values - fld.values)) < 1e-10


def test_non_band_limited_warning():
    th = GRID.theta
    rough = np.outer((np.cos(th) > 0).astype(float), np.ones(GRID.n_phi))  # step
    fld = sp.SpinWeightedField(0, GRID, rough)
    assert sp.eth(fld).warning
    smooth = sp.sw_harmonic(0, 4, 2, GRID)
    assert not sp.eth(smooth).warning


# ---------------------------------------------------------- tensor harmonics


def test_vector_harmonic_divergence_free():
    for l, m in [(1, 0), (2, 1), (4, -3)]:
        V = sp.tensor_harmonics(l, m, GRID, "vector", 1)
        assert np.max(np.abs(sp.delta_one_form(V).values)) < 1e-9


def test_delta_d_scalar():
    for l, m in [(1, 1), (3, 0), (5, 2)]:
        Y = sp.tensor_harmonics(l, m, GRID, "scalar", 0)
        dS = sp.d_scalar(Y)
        out = sp.delta_one_form(dS)
        assert np.max(np.abs(out.values - l * (l + 1) * Y.values)) < 1e-9


def test_trace_free_part_vanishes_low_l():
    for l in (0, 1):
        for m in range(-l, l + 1):
            tf = sp.tensor_harmonics(l, m, GRID, "scalar", 2)["tracefree"]
            for comp in (tf.pp, tf.pm, tf.mm):
                assert np.max(np.abs(comp.values)) < 1e-10


def test_one_form_laplacian_eigenvalue():
    """dS_l and V_l lie in ker(Delta - (l(l+1)-1))."""
    for l, m in [(1, 1), (3, -2)]:
        for w in (
            sp.tensor_harmonics(l, m, GRID, "scalar", 1),
            sp.tensor_harmonics(l, m, GRID, "vector", 1),
        ):
            lap = sp.laplacian_one_form(w)
            ev = l * (l + 1) - 1
            assert np.max(np.abs(lap.plus.values - ev * w.plus.values)) < 1e-8
            assert np.max(np.abs(lap.minus.values - ev * w.minus.values)) < 1e-8


def test_symmetric_tensor_identity_list():
    """The displayed identities for S in S_l, V in V_l."""
    for l, m in [(2, 1), (4, -2)]:
        Y = sp.sw_harmonic(0, l, m, GRID)
        dS = sp.d_scalar(Y)
        V = sp.hodge_star(dS)
        Sg = sp.scalar_times_metric(Y)
        tf = sp.delta_star0(dS)
        dsV = sp.delta_star(V)
        ll = l * (l + 1)

        # delta*(dS) = -(l(l+1)/2) S g + delta*_0 dS
        ds_dS = sp.delta_star(dS)
        assert np.max(np.abs(ds_dS.pm.values - (-(ll / 2.0) * Sg.pm.values + tf.pm.values))) < 1e-9
        assert np.max(np.abs(ds_dS.pp.values - tf.pp.values)) < 1e-9

        # delta(S g) = -dS
        dSg = sp.delta_tensor(Sg)
        assert np.max(np.abs(dSg.plus.values + dS.plus.values)) < 1e-10

        # delta(delta*_0 dS) = (l(l+1)-2)/2 dS
        out = sp.delta_tensor(tf)
        assert np.max(np.abs(out.plus.values - (ll - 2) / 2.0 * dS.plus.values)) < 1e-9
        assert np.max(np.abs(out.minus.values - (ll - 2) / 2.0 * dS.minus.values)) < 1e-9

        # delta delta* V = (l(l+1)-2)/2 V
        outV = sp.delta_tensor(dsV)
        assert np.max(np.abs(outV.plus.values - (ll - 2) / 2.0 * V.plus.values)) < 1e-9

        # Delta on the trace-free tensors has eigenvalue l(l+1)-4
        for T in (tf, dsV):
            lap = sp.laplacian_tensor(T)
            assert np.max(np.abs(lap.pp.values - (ll - 4) * T.pp.values)) < 1e-8
            assert np.max(np.abs(lap.mm.values - (ll - 4) * T.mm.values)) < 1e-8

        # delta* V is trace-free; S g is pure trace
        assert np.max(np.abs(dsV.trace().values)) < 1e-9
        assert np.max(np.abs(Sg.trace().values - 2.0 * Y.values)) < 1e-13


def test_vector_laplacian_l2_eigenvalue_two():
    dsV = sp.tensor_harmonics(2, 1, GRID, "vector", 2)
    lap = sp.laplacian_tensor(dsV)
    assert np.max(np.abs(lap.pp.values - 2.0 * dsV.pp.values)) < 1e-8


def test_coordinate_components_consistency():
    """Dyad -> coordinate conversion: d_scalar coords equal direct
    (d_theta Y, i m Y)."""
    l, m = 3, 2
    Y = sp.sw_harmonic(0, l, m, GRID)
    dS = sp.d_scalar(Y)
    w_th, w_ph = dS.coords()
    eps = 1e-6
    th = GRID.theta
    dth = (
        sp.sw_theta_function(0, l, m, th + eps) - sp.sw_theta_function(0, l, m, th - eps)
    ) / (2 * eps)
    expected_th = np.outer(dth, np.exp(1j * m * GRID.phi))
    assert np.max(np.abs(w_th - expected_th)) < 1e-8
    assert np.max(np.abs(w_ph - 1j * m * Y.values)) < 1e-10


# ------------------------------------------------------- spheroidal operator


def test_spheroidal_sigma_zero_diagonal():
    kp = KerrParams(1.0, 0.9)
    for s, k in [(-2, 2), (0, 0), (1, -1)]:
        lmin = max(abs(s), abs(k))
        M = sp.spheroidal_operator(kp, s, 0.0, k, lmin + 10)
        expect = np.diag(
            [l * (l + 1) - s * s for l in range(lmin, lmin + 11)]
        ).astype(complex)
        assert np.max(np.abs(M - expect)) < 1e-10


def test_spheroidal_spin_zero_a_zero_independent_of_sigma():
    kp = KerrParams(1.0, 0.0)
    M1 = sp.spheroidal_operator(kp, 1, 0.3, 1, 10)
    M2 = sp.spheroidal_operator(kp, 1, 2.0 + 0.5j, 1, 10)
    assert np.max(np.abs(M1 - M2)) == 0.0


def test_spheroidal_eigen_continuity():
    kp = KerrParams(1.0, 0.9)
    s, k, lmax = -2, 2, 16
    lam = lambda sig: sp.spheroidal_eigen(kp, s, sig, k, lmax)[0].eigenvalue
    base = lam(0.4 + 0.2j)
    for d in (1e-3, 1e-4):
        assert abs(lam(0.4 + 0.2j + d) - base) < 20.0 * d


def test_spheroidal_truncation_convergence():
    kp = KerrParams(1.0, 0.9)
    s, k, l = -2, 2, 2
    lams = [
        sp.spheroidal_eigen(kp, s, 0.7 + 0.3j, k, l + lm)[0].eigenvalue
        for lm in (16, 20)
    ]
    assert abs(lams[0] - lams[1]) < 1e-10


def test_spheroidal_eigen_residual():
    kp = KerrParams(1.0, 0.9)
    pairs = sp.spheroidal_eigen(kp, -2, 0.5 + 0.1j, 2, 14)
    M = sp.spheroidal_operator(kp, -2, 0.5 + 0.1j, 2, 14)
    for pair in pairs[:4]:
        resid = M @ pair.coeffs - pair.eigenvalue * pair.coeffs
        assert np.max(np.abs(resid)) < 1e-8
        assert pair.l_label >= max(abs(pair.s), abs(pair.k))


def test_spheroidal_convergence_error():
    kp = KerrParams(1.0, 0.9)
    with pytest.raises(sp.ConvergenceError):
        sp.spheroidal_eigen(kp, -2, 4.0 + 2.0j, 2, 4, n_branches=3)


def test_export_basis_csv(tmp_path):
    path = tmp_path / "basis_s-2.csv"
    sp.export_basis_csv(path, -2, 4, sp.SphericalGrid(8, 4))
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "l,m,node,real,imag"
    n_rows = sum((2 * l + 1) * 8 for l in range(2, 5))
    assert len(lines) == 1 + n_rows
