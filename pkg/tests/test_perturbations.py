"""Linearized Kerr family and the stationary gauge operators
delta*, delta, trace reversal."""

import math

import numpy as np
import pytest

from kerrmodes import geometry, perturbations, tetrads
from kerrmodes.fields import from_callable
from kerrmodes.params import BL, STAR, KerrParams

from conftest import bl, star


def killing_one_form(params, chart, axis):
    """Covariant components of the Killing field d/dt (axis 0) or
    d/dphi (axis 3): the corresponding metric row, with analytic jacobian."""
    from kerrmodes.fields import TensorField

    field = geometry.metric(params, chart)
    return TensorField(
        chart,
        1,
        lambda p, pt: field.g(pt)[axis],
        lambda p, pt: field.dg(pt)[:, axis, :],
        None,
        name=f"killing{axis}",
    )


# ------------------------------------------------------------ linearized Kerr


def test_gdot_mass_star_closed_form(kerr_rapid):
    """gdot(1,0) = -(2r/rho^2)(dt* - a sin^2 th dphi*)^2 for r <= 3m."""
    gd = perturbations.linearized_kerr(kerr_rapid, 1.0, 0.0, STAR)
    a = kerr_rapid.a
    for r in (1.1, 1.44, 2.0, 2.9):
        for th in (0.5, 1.2, 2.6):
            pt = star(0.0, r, th)
            cov = np.array([1.0, 0.0, 0.0, -a * math.sin(th) ** 2])
            expected = -(2.0 * r / kerr_rapid.rho2(r, th)) * np.outer(cov, cov)
            assert np.max(np.abs(gd.h(pt) - expected)) < 1e-13


def test_gdot_star_restricted_to_inner_region(kerr_rapid):
    gd = perturbations.linearized_kerr(kerr_rapid, 1.0, 0.0, STAR)
    with pytest.raises(ValueError, match="r <= 3m"):
        gd.h(star(0.0, 3.5, 1.0))


def test_gdot_mass_traceless(kerr_rapid):
    for chart, mk in ((BL, bl), (STAR, star)):
        gd = perturbations.linearized_kerr(kerr_rapid, 1.0, 0.0, chart)
        for r in (1.5, 2.4) if chart is STAR else (2.0, 7.0):
            assert abs(gd.trace(mk(0.0, r, 0.9))) < 1e-13


@pytest.mark.parametrize("chart", [BL, STAR])
@pytest.mark.parametrize("mdot,adot", [(1.0, 0.0), (0.0, 1.0), (0.7, -0.4)])
def test_gdot_against_central_difference(kerr_rapid, chart, mdot, adot):
    gd = perturbations.linearized_kerr(kerr_rapid, mdot, adot, chart)
    fd = perturbations.linearized_kerr_fd(kerr_rapid, mdot, adot, chart)
    mk = bl if chart is BL else star
    pts = [(2.1, 0.7), (2.7, 1.9)] if chart is STAR else [(2.1, 0.7), (5.0, 1.9)]
    for r, th in pts:
        pt = mk(0.0, r, th)
        assert np.max(np.abs(gd.h(pt) - fd.h(pt))) < 1e-8


def test_gdot_symmetry_and_projections(kerr_rapid):
    gd = perturbations.linearized_kerr(kerr_rapid, 0.5, 0.8, BL)
    pt = bl(0.0, 3.1, 1.1)
    h = gd.h(pt)
    assert np.allclose(h, h.T, atol=1e-14)
    frame = tetrads.kinnersley(kerr_rapid, pt)
    proj = gd.projections(frame)
    # reconstruct h from its ten projections via tetrad completeness
    field = geometry.metric(kerr_rapid, BL)
    g = field.g(pt)
    low = {k: g @ v for k, v in frame.legs().items()}
    recon = np.zeros((4, 4), dtype=complex)
    pair = {"l": "n", "n": "l", "m": "mbar", "mbar": "m"}
    sgn = {"l": 1.0, "n": 1.0, "m": -1.0, "mbar": -1.0}
    names = ["l", "n", "m", "mbar"]
    for x in names:
        for y in names:
            key = x + y if x + y in proj else y + x
            recon += sgn[x] * sgn[y] * proj[key] * np.outer(low[pair[x]], low[pair[y]])
    assert np.max(np.abs(recon - h)) < 1e-11


# ------------------------------------------------------------ gauge operators


@pytest.mark.parametrize("chart,mk", [(BL, bl), (STAR, star)])
@pytest.mark.parametrize("axis", [0, 3])
def test_delta_star_kills_killing_forms(kerr_rapid, chart, mk, axis):
    omega = killing_one_form(kerr_rapid, chart, axis)
    ds = perturbations.delta_star(kerr_rapid, omega)
    rs = (1.5, 2.4, 2.9) if chart is STAR else (2.2, 4.5, 30.0)
    for r in rs:
        assert np.max(np.abs(ds.h(mk(0.0, r, 1.0)))) < 1e-10


def test_trace_reversal_involution(kerr_rapid):
    gd = perturbations.linearized_kerr(kerr_rapid, 0.3, 1.1, BL)
    gg = perturbations.trace_reversal(
        kerr_rapid, perturbations.trace_reversal(kerr_rapid, gd)
    )
    for r, th in ((2.2, 0.6), (9.0, 2.1)):
        pt = bl(0.0, r, th)
        assert np.max(np.abs(gg.h(pt) - gd.h(pt))) < 1e-12


def test_trace_reversal_trace(kerr_rapid):
    """tr G(h) = -tr h in four dimensions."""
    gd = perturbations.linearized_kerr(kerr_rapid, 0.0, 1.0, BL)
    G = perturbations.trace_reversal(kerr_rapid, gd)
    pt = bl(0.0, 4.4, 1.3)
    assert G.trace(pt) == pytest.approx(-gd.trace(pt), rel=1e-11, abs=1e-13)


def test_delta_G_gdot_closed_form(kerr_rapid):
    """delta(G gdot(1,0)) = (2/rho^2) (d/dr)^flat in the Star chart."""
    gd = perturbations.linearized_kerr(kerr_rapid, 1.0, 0.0, STAR)
    G = perturbations.trace_reversal(kerr_rapid, gd)
    field = geometry.metric(kerr_rapid, STAR)
    for r in (kerr_rapid.r_plus, 1.2, 2.0, 2.8):
        for th in (0.4, 1.5, 2.5):
            pt = star(0.0, r, th)
            got = perturbations.delta(kerr_rapid, G, pt)
            expected = (2.0 / kerr_rapid.rho2(r, th)) * field.g(pt)[1]
            assert np.max(np.abs(got - expected)) < 1e-10


def test_delta_is_minus_divergence(kerr_rapid):
    gd = perturbations.linearized_kerr(kerr_rapid, 0.2, 0.9, BL)
    pt = bl(0.0, 3.3, 0.8)
    assert np.max(
        np.abs(
            perturbations.delta(kerr_rapid, gd, pt)
            + perturbations.divergence(kerr_rapid, gd, pt)
        )
    ) == 0.0
