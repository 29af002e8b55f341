"""Tests for the volume, horizon-surface, and dt-family pairings."""

import json

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import sph_harm_y

from kerrmodes import fields, pairings, wavemodes
from kerrmodes.params import BL, STAR, KerrParams, SpacetimePoint


# ------------------------------------------------------------------ helpers


def _compact_oneform(seed, r_lo=3.0, r_hi=10.0, chart=BL):
    """A random 1-form compactly supported in (r_lo, r_hi), pole-regular."""
    rng = np.random.default_rng(seed)
    c = rng.normal(size=4)
    half = 0.5 * (r_hi - r_lo)
    norm = half * half

    def val(p, q):
        r, th = q.r, q.theta
        if not (r_lo < r < r_hi):
            return np.zeros(4)
        b = ((r - r_lo) * (r_hi - r) / norm) ** 4
        s, co = np.sin(th), np.cos(th)
        return b * np.array([c[0] * (1 + 0.3 * co), c[1] * (1 - 0.2 * co),
                             c[2] * s * co, c[3] * s * s])

    return fields.from_callable(chart, val, rank=1, name=f"bump{seed}")


def _ylm(l, m):
    def f(p, q):
        return complex(sph_harm_y(l, m, q.theta, q.phi))
    return f


# ------------------------------------------------------------ tree_sum, chi


def test_tree_sum_matches_plain_sum_and_is_deterministic():
    rng = np.random.default_rng(7)
    vals = list(rng.normal(size=257) + 1j * rng.normal(size=257))
    s1 = pairings.tree_sum(vals)
    s2 = pairings.tree_sum(vals)
    assert s1 == s2
    assert abs(s1 - sum(vals)) < 1e-12
    assert pairings.tree_sum([]) == 0.0


def test_cutoff_chi_shape_and_moment():
    assert pairings.cutoff_chi(0.0) == 1.0
    assert pairings.cutoff_chi(1.0) == 0.0
    assert pairings.cutoff_chi(-0.5) == 1.0
    assert pairings.cutoff_chi(1.5) == 0.0
    # second derivative consistent with an FD of chi
    xs = np.linspace(0.05, 0.95, 19)
    h = 1e-5
    fd = (pairings.cutoff_chi(xs + h) - 2 * pairings.cutoff_chi(xs)
          + pairings.cutoff_chi(xs - h)) / h**2
    assert np.max(np.abs(fd - pairings.cutoff_chi_pp(xs))) < 1e-4
    # integration by parts with chi(0)=1, chi(1)=0 gives int rho chi'' = 1
    val, _ = quad(lambda x: x * pairings.cutoff_chi_pp(x), 0.0, 1.0)
    assert abs(val - 1.0) < 1e-12


# ------------------------------------------------------- volume quadrature


def test_volume_matches_closed_form(kerr_fast):
    quad_ = pairings.VolumeQuadrature(kerr_fast, 2.0, 50.0)
    assert abs(quad_.volume() - quad_.closed_form_volume()) < 1e-10


def test_volume_quadrature_refinement(kerr_fast):
    def f(p, q):
        return np.exp(-((q.r - 5.0) / 3.0) ** 2) * (1 + 0.4 * np.cos(q.theta) ** 2)

    coarse = pairings.VolumeQuadrature(kerr_fast, 2.0, 30.0)
    fine = pairings.VolumeQuadrature(kerr_fast, 2.0, 30.0, n_r_panels=48)
    v1 = pairings.scalar_pairing(kerr_fast, f, f, coarse).value
    v2 = pairings.scalar_pairing(kerr_fast, f, f, fine).value
    assert abs(v1 - v2) < 1e-9


def test_volume_quadrature_bad_domain(kerr_fast):
    with pytest.raises(ValueError):
        pairings.VolumeQuadrature(kerr_fast, -1.0, 10.0)
    with pytest.raises(ValueError):
        pairings.VolumeQuadrature(kerr_fast, 5.0, 5.0)


def test_tail_extrapolation_exact_inverse_square(kerr_schw):
    # f g rho^2 integrates the angular profile 4 pi / r^2 exactly at a = 0
    def f(p, q):
        return 1.0 / q.r**2

    quad_ = pairings.VolumeQuadrature(kerr_schw, 2.0, 1e4, tail=True,
                                      n_r_panels=48)
    res = pairings.scalar_pairing(kerr_schw, f, f, quad_)
    exact = 4 * np.pi * (1.0 / 2.0)  # int_2^inf 4 pi / r^2 dr
    assert abs(res.value - exact) < 1e-8
    assert res.error_bar < 1e-6


# --------------------------------------------------------- scalar pairings


def test_scalar_pairing_positive_and_symmetric(kerr_fast):
    def f(p, q):
        return np.exp(-q.r / 4.0) * (1 + np.cos(q.theta))

    def g(p, q):
        return np.sin(q.theta) ** 2 / q.r

    quad_ = pairings.VolumeQuadrature(kerr_fast, 2.0, 40.0)
    ff = pairings.scalar_pairing(kerr_fast, f, f, quad_).value
    fg = pairings.scalar_pairing(kerr_fast, f, g, quad_).value
    gf = pairings.scalar_pairing(kerr_fast, g, f, quad_).value
    assert ff.real > 0 and abs(ff.imag) < 1e-14
    assert abs(fg - gf) < 1e-14


def test_scalar_pairing_ylm_orthogonality(kerr_schw, kerr_fast):
    quad0 = pairings.VolumeQuadrature(kerr_schw, 2.0, 10.0)
    # a = 0: the measure factorizes as r^2 sin(theta); full orthogonality
    for (l1, m1, l2, m2) in [(2, 1, 3, -1), (1, 0, 3, 0), (2, 2, 2, -1)]:
        v = pairings.scalar_pairing(kerr_schw, _ylm(l1, m1),
                                    _ylm(l2, m2), quad0).value
        assert abs(v) < 1e-12
    # <Y_lm, Y_l,-m> is the nonzero diagonal pairing (no conjugate taken)
    diag = pairings.scalar_pairing(kerr_schw, _ylm(2, 1), _ylm(2, -1),
                                   quad0).value
    assert abs(diag) > 1e-3
    # a != 0: the azimuthal selection rule m + m' = 0 is exact, and the
    # a^2 cos^2(theta) weight only couples same-parity l, so l and l+1
    # remain orthogonal
    quada = pairings.VolumeQuadrature(kerr_fast, 2.0, 10.0)
    assert abs(pairings.scalar_pairing(kerr_fast, _ylm(2, 1), _ylm(2, 1),
                                       quada).value) < 1e-12
    assert abs(pairings.scalar_pairing(kerr_fast, _ylm(2, 0), _ylm(3, 0),
                                       quada).value) < 1e-12


def test_scalar_pairing_rejects_oneforms(kerr_fast):
    quad_ = pairings.VolumeQuadrature(kerr_fast, 2.0, 10.0)
    w = _compact_oneform(0)
    with pytest.raises(ValueError):
        pairings.scalar_pairing(kerr_fast, w, w, quad_)


# --------------------------------------------------------- chart invariance


def test_oneform_pairing_chart_independence(kerr_fast):
    # supported where both charts are valid (r <= 3m)
    w_bl = _compact_oneform(3, r_lo=2.1, r_hi=2.9, chart=BL)
    w_star = wavemodes.one_form_chart_transform(kerr_fast, w_bl, STAR)
    quad_bl = pairings.VolumeQuadrature(kerr_fast, 2.1, 2.9, chart=BL,
                                        n_r_panels=8, n_theta=24, n_phi=4)
    quad_star = pairings.VolumeQuadrature(kerr_fast, 2.1, 2.9, chart=STAR,
                                          n_r_panels=8, n_theta=24, n_phi=4)
    v_bl = pairings.oneform_pairing(kerr_fast, w_bl, w_bl, quad_bl).value
    v_star = pairings.oneform_pairing(kerr_fast, w_star, w_star,
                                      quad_star).value
    assert abs(v_bl - v_star) < 1e-8


# --------------------------------------------------- horizon surface pairing


def test_horizon_pairing_mdot_eight_pi(kerr_rapid):
    v = pairings.constraint_source(kerr_rapid, 1.0, 0.0)
    res = pairings.horizon_surface_pairing(kerr_rapid, v)
    assert abs(res.value - 8 * np.pi) < 1e-8


def test_horizon_pairing_adot_zero(kerr_rapid):
    v = pairings.constraint_source(kerr_rapid, 0.0, 1.0)
    res = pairings.horizon_surface_pairing(kerr_rapid, v)
    assert abs(res.value) < 1e-8


def test_horizon_pairing_zero_source(kerr_fast):
    res = pairings.horizon_surface_pairing(
        kerr_fast, lambda p, q: np.zeros(4))
    assert res.value == 0.0


def test_horizon_pairing_linear(kerr_fast):
    v1 = pairings.constraint_source(kerr_fast, 1.0, 0.0)
    v2 = pairings.constraint_source(kerr_fast, 0.0, 1.0)

    def combo(p, q):
        return 0.7 * np.asarray(v1(p, q)) - 1.3 * np.asarray(v2(p, q))

    p1 = pairings.horizon_surface_pairing(kerr_fast, v1).value
    p2 = pairings.horizon_surface_pairing(kerr_fast, v2).value
    pc = pairings.horizon_surface_pairing(kerr_fast, combo).value
    assert abs(pc - (0.7 * p1 - 1.3 * p2)) < 1e-10


def test_horizon_pairing_r0_stability(kerr_fast):
    v = pairings.constraint_source(kerr_fast, 1.0, 0.0)
    base = pairings.horizon_surface_pairing(kerr_fast, v).value
    for r0 in (0.5, 1.0, 1.5):
        res = pairings.horizon_surface_pairing(kerr_fast, v, r0=r0)
        assert abs(res.value - base) < 1e-12
    with pytest.raises(ValueError):
        pairings.horizon_surface_pairing(kerr_fast, v, r0=5.0)


# ----------------------------------------------------------- dt-family 4 pi


def test_dt_family_limit_is_four_pi(kerr_rapid):
    res = pairings.dt_family_limit(kerr_rapid)
    assert abs(res["limit"] - 4 * np.pi) < 1e-6
    assert res["exponent"] >= 0.9


def test_dt_family_disjoint_ladders_agree(kerr_fast):
    r1 = pairings.dt_family_limit(kerr_fast,
                                  eps_ladder=[0.08 / 2**k for k in range(6)])
    r2 = pairings.dt_family_limit(kerr_fast,
                                  eps_ladder=[0.06 / 2**k for k in range(6)])
    assert abs(r1["limit"] - r2["limit"]) < 1e-6


def test_dt_family_eps_domain(kerr_fast):
    with pytest.raises(ValueError):
        pairings.dt_family_pairing(kerr_fast, 0.2)
    with pytest.raises(ValueError):
        pairings.dt_family_pairing(kerr_fast, 0.0)


# --------------------------------------------- gauge insensitivity remark


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_remark_vanishes_for_compact_oneforms(kerr_rapid, seed):
    w = _compact_oneform(seed)
    v = pairings.remark_gauge_insensitivity(kerr_rapid, w, n_phi=2)
    assert abs(v) < 1e-7


def test_remark_zero_oneform(kerr_fast):
    w = fields.from_callable(BL, lambda p, q: np.zeros(4), rank=1, name="0")
    v = pairings.remark_gauge_insensitivity(kerr_fast, w, n_phi=2)
    assert abs(v) < 1e-14


def test_remark_rejects_nondecaying(kerr_fast):
    dt = fields.from_callable(BL, lambda p, q: np.array([1.0, 0, 0, 0]),
                              rank=1, name="dt")
    with pytest.raises(ValueError):
        pairings.remark_gauge_insensitivity(kerr_fast, dt)


# ------------------------------------------------------------- JSON export


def test_export_pairings_json(tmp_path, kerr_fast):
    res = pairings.horizon_surface_pairing(
        kerr_fast, pairings.constraint_source(kerr_fast, 1.0, 0.0))
    path = tmp_path / "pairings.json"
    pairings.export_pairings_json(path, [res])
    records = json.loads(path.read_text())
    assert len(records) == 1
    assert set(records[0]) == {"name", "value_re", "value_im",
                               "error_bar", "parameters"}
    assert abs(records[0]["value_re"] - 8 * np.pi) < 1e-8
