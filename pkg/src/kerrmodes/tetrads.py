"""Null tetrads on Kerr, GHP spin coefficients and Weyl scalars.

Kinnersley tetrad components (Boyer-Lindquist, r > r_+):
    l = ((r^2+a^2)/Delta, 1, 0, a/Delta)
    n = ((r^2+a^2)/(2 rho^2), -Delta/(2 rho^2), 0, a/(2 rho^2))
    m = (i a sin(theta), 0, 1, i/sin(theta)) / (sqrt(2) (r + i a cos(theta)))
The normalized frame is the boost l~ = Delta l, n~ = n/Delta, m~ = m.

GHP spin coefficients (all properly weighted):
    rho  = m^a mbar^b nabla_b l_a      rho' = mbar^a m^b nabla_b n_a
    tau  = m^a n^b nabla_b l_a         tau' = mbar^a l^b nabla_b n_a

Weyl scalars indexed by spin weight: Psi_2 = W(l,m,l,m), Psi_1 = W(l,n,l,m),
Psi_0 = W(l,m,mbar,n), Psi_-1 = W(l,n,mbar,n), Psi_-2 = W(n,mbar,n,mbar).
In the principal (Kinnersley) tetrad only the middle scalar Psi_0 survives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry, symbolic
from .params import BL, KerrParams, SpacetimePoint


@dataclass(frozen=True)
class TetradFrame:
    """Complex null tetrad at a point with analytic first derivatives.

    Leg arrays are contravariant components; d-arrays are indexed
    [c, comp] = d_c (leg^comp), with only c in {r, theta} nonzero.
    """

    params: KerrParams
    point: SpacetimePoint
    flavor: str  # "kinnersley" | "normalized"
    l: np.ndarray
    n: np.ndarray
    m: np.ndarray
    dl: np.ndarray
    dn: np.ndarray
    dm: np.ndarray

    @property
    def mbar(self) -> np.ndarray:
        return np.conj(self.m)

    @property
    def dmbar(self) -> np.ndarray:
        return np.conj(self.dm)

    @property
    def p(self) -> complex:
        return self.params.p_scalar(self.point.r, self.point.theta)

    def legs(self):
        return {"l": self.l, "n": self.n, "m": self.m, "mbar": self.mbar}

    def metric_field(self) -> geometry.MetricField:
        return geometry.metric(self.params, self.point.chart)


def _eval_legs(params: KerrParams, point: SpacetimePoint):
    block = symbolic.kinnersley_block()
    args = (params.m, params.a, point.r, point.theta)
    out = {}
    for name in ("l", "n", "m"):
        stack = np.asarray(block[name](*args), dtype=complex)  # (4, 3)
        vec = stack[:, 0]
        dvec = np.zeros((4, 4), dtype=complex)
        dvec[1] = stack[:, 1]
        dvec[2] = stack[:, 2]
        out[name] = (vec, dvec)
    return out


def kinnersley(params: KerrParams, point: SpacetimePoint) -> TetradFrame:
    if point.chart is not BL:
        raise ValueError("Kinnersley tetrad is defined in the Boyer-Lindquist chart")
    point.validate(params)
    legs = _eval_legs(params, point)
    return TetradFrame(
        params,
        point,
        "kinnersley",
        legs["l"][0],
        legs["n"][0],
        legs["m"][0],
        legs["l"][1],
        legs["n"][1],
        legs["m"][1],
    )


def normalized_tetrad(params: KerrParams, point: SpacetimePoint) -> TetradFrame:
    """Boosted frame l~ = Delta l, n~ = n/Delta, m~ = m (weighted scalars
    rescale by Delta^s relative to the Kinnersley frame)."""
    base = kinnersley(params, point)
    r = point.r
    delta = params.delta(r)
    ddelta = 2.0 * r - 2.0 * params.m
    dl = delta * base.dl
    dl[1] += ddelta * base.l
    dn = base.dn / delta
    dn[1] -= ddelta / delta**2 * base.n
    return TetradFrame(params, point, "normalized", delta * base.l, base.n / delta, base.m, dl, dn, base.dm)


def lower_leg(frame: TetradFrame, which: str):
    """Covariant components X_a = g_ab X^b and coordinate derivatives
    d_c X_a for a tetrad leg."""
    field = frame.metric_field()
    g = field.g(frame.point)
    dg = field.dg(frame.point)
    vec, dvec = {
        "l": (frame.l, frame.dl),
        "n": (frame.n, frame.dn),
        "m": (frame.m, frame.dm),
        "mbar": (frame.mbar, frame.dmbar),
    }[which]
    low = g @ vec
    dlow = np.einsum("cab,b->ca", dg, vec) + np.einsum("ab,cb->ca", g, dvec)
    return low, dlow


def covariant_derivative_lower(frame: TetradFrame, which: str) -> np.ndarray:
    """nabla[b, a] = nabla_b X_a for the chosen leg (lower index)."""
    low, dlow = lower_leg(frame, which)
    gamma = geometry.christoffel(frame.metric_field(), frame.point)
    return dlow - np.einsum("cba,c->ba", gamma.transpose(0, 1, 2), low)


def spin_coefficients(frame: TetradFrame):
    """(rho, rho', tau, tau') by the displayed covariant contractions."""
    nab_l = covariant_derivative_lower(frame, "l")
    nab_n = covariant_derivative_lower(frame, "n")
    m, mb, n, l = frame.m, frame.mbar, frame.n, frame.l
    rho = np.einsum("a,b,ba->", m, mb, nab_l)
    rho_p = np.einsum("a,b,ba->", mb, m, nab_n)
    tau = np.einsum("a,b,ba->", m, n, nab_l)
    tau_p = np.einsum("a,b,ba->", mb, l, nab_n)
    return rho, rho_p, tau, tau_p


def weyl_scalars(frame: TetradFrame):
    """Spin-weight-indexed Weyl scalars (Psi_2, Psi_1, Psi_0, Psi_-1, Psi_-2)
    from the analytic Riemann tensor (vacuum: Weyl = Riemann)."""
    W = geometry.riemann_lower(frame.metric_field(), frame.point)
    l, n, m, mb = frame.l, frame.n, frame.m, frame.mbar
    c = lambda x, y, z, w: np.einsum("abcd,a,b,c,d->", W, x, y, z, w)
    return (
        c(l, m, l, m),
        c(l, n, l, m),
        c(l, m, mb, n),
        c(l, n, mb, n),
        c(n, mb, n, mb),
    )


def background_psi0(frame: TetradFrame) -> complex:
    """Middle Weyl scalar Psi_0 (the only survivor in a principal frame)."""
    return weyl_scalars(frame)[2]


def ghp_connection(frame: TetradFrame) -> np.ndarray:
    """GHP connection 1-form omega_a = (n^b nabla_a l_b - mbar^b nabla_a m_b)/2.

    For a scalar of GHP type (p, q) = (w+s, w-s) the weighted derivative is
    Theta_a u = (d_a - p omega_a - q conj(omega_a)) u.
    """
    nab_l = covariant_derivative_lower(frame, "l")  # [a, b] = nabla_a l_b
    # nabla_a m_b from the lower-index covariant derivative of m
    nab_m = covariant_derivative_lower(frame, "m")
    return 0.5 * (nab_l @ frame.n - nab_m @ frame.mbar)


def frame_inner_products(frame: TetradFrame) -> np.ndarray:
    """4x4 Gram matrix of (l, n, m, mbar) under g (normalization checks)."""
    g = frame.metric_field().g(frame.point)
    legs = [frame.l, frame.n, frame.m, frame.mbar]
    return np.array([[np.einsum("ab,a,b->", g, x, y) for y in legs] for x in legs])


def metric_reconstruction(frame: TetradFrame) -> np.ndarray:
    """2(l_(a n_b) - m_(a mbar_b)); equals g_ab for a normalized null tetrad."""
    g = frame.metric_field().g(frame.point)
    ll = g @ frame.l
    nl = g @ frame.n
    ml = g @ frame.m
    mbl = g @ frame.mbar
    sym = lambda x, y: np.outer(x, y) + np.outer(y, x)
    return sym(ll, nl) - sym(ml, mbl)
