"""L2 pairings on the stationary slice, horizon-supported distributional
pairings, and the dt-family pairing.

The volume pairing is <f, g> = int f g rho^2 sin(theta) dr dtheta dphi
(indices raised with the background inverse metric for 1-forms). The
distributional dual states supported on the horizon are paired by reducing
to the surface integral at r = r_plus. Panel sums use deterministic
pairwise (tree) summation so results are bit-identical run to run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import geometry, perturbations, wavemodes
from .fields import TensorField
from .params import BL, STAR, Chart, KerrParams, SpacetimePoint

__all__ = [
    "VolumeQuadrature", "PairingResult", "tree_sum",
    "scalar_pairing", "oneform_pairing",
    "horizon_surface_pairing", "constraint_source",
    "dt_family_pairing", "dt_family_limit",
    "remark_gauge_insensitivity", "export_pairings_json",
]


def tree_sum(values) -> complex:
    """Deterministic pairwise summation (order-stable, run-to-run exact)."""
    vals = list(values)
    if not vals:
        return 0.0 + 0.0j
    while len(vals) > 1:
        nxt = [vals[i] + vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return complex(vals[0])


# ------------------------------------------------------------- cutoff bump

def cutoff_chi(x):
    """C^2 bump from the quintic smoothstep: 1 near 0, 0 beyond 1."""
    x = np.asarray(x, dtype=float)
    s = 6 * x**5 - 15 * x**4 + 10 * x**3
    return np.where(x <= 0, 1.0, np.where(x >= 1, 0.0, 1.0 - s))


def cutoff_chi_pp(x):
    """Second derivative of the cutoff; int_0^1 rho chi''(rho) drho = 1."""
    x = np.asarray(x, dtype=float)
    spp = 120 * x**3 - 180 * x**2 + 60 * x
    return np.where((x > 0) & (x < 1), -spp, 0.0)


# ------------------------------------------------------------ result record


@dataclass(frozen=True)
class PairingResult:
    name: str
    value: complex
    error_bar: float
    parameters: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "name": self.name,
            "value_re": float(np.real(self.value)),
            "value_im": float(np.imag(self.value)),
            "error_bar": float(self.error_bar),
            "parameters": self.parameters,
        }


def export_pairings_json(path, results: Sequence[PairingResult]):
    with open(path, "w") as fh:
        json.dump([r.to_record() for r in results], fh, indent=2)


# -------------------------------------------------------- volume quadrature


class VolumeQuadrature:
    """Tensor-product rule for int f rho^2 sin(theta) dr dtheta dphi.

    Gauss-Legendre in x = cos(theta), trapezoid in phi, mapped Gauss panels
    in r over [r0, r_max] (geometric panel edges), with an optional
    algebraic-tail extrapolation beyond r_max: the angularly integrated
    radial profile is fitted to a + b/r + c/r^2 on the last decade, the
    convergent part of the fit is integrated analytically, and the fit
    residual (plus any non-decaying coefficients) is reported as the
    error bar.
    """

    def __init__(self, params: KerrParams, r0: float, r_max: float,
                 chart: Chart = BL, n_r_panels: int = 24, n_r_nodes: int = 12,
                 n_theta: int = 32, n_phi: int = 8, tail: bool = False):
        if not (r0 > 0 and r_max > r0):
            raise ValueError("need 0 < r0 < r_max")
        self.params = params
        self.chart = chart
        self.r0, self.r_max = float(r0), float(r_max)
        self.tail = bool(tail)
        xg, wg = leggauss(n_r_nodes)
        edges = np.geomspace(self.r0, self.r_max, n_r_panels + 1)
        rs, wr = [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            mid, hw = 0.5 * (lo + hi), 0.5 * (hi - lo)
            rs.extend(mid + hw * xg)
            wr.extend(hw * wg)
        self.r_nodes = np.array(rs)
        self.r_weights = np.array(wr)
        self.x_nodes, self.x_weights = leggauss(n_theta)  # x = cos(theta)
        self.phi_nodes = np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False)
        self.phi_weight = 2 * np.pi / n_phi

    def _angular(self, integrand: Callable, r: float) -> complex:
        a = self.params.a
        terms = []
        for x, wx in zip(self.x_nodes, self.x_weights):
            theta = float(np.arccos(x))
            rho2 = r * r + (a * x) ** 2
            for phi in self.phi_nodes:
                terms.append(wx * self.phi_weight * rho2
                             * integrand(r, theta, phi))
        return tree_sum(terms)

    def integrate(self, integrand: Callable) -> tuple:
        """integrand(r, theta, phi) -> complex; returns (value, error_bar)."""
        box = tree_sum(w * self._angular(integrand, r)
                       for r, w in zip(self.r_nodes, self.r_weights))
        if not self.tail:
            return box, 0.0
        # fit the radial profile on the last decade and integrate the fit
        rs = np.geomspace(self.r_max / 10.0, self.r_max, 8)
        prof = np.array([self._angular(integrand, r) for r in rs])
        basis = np.column_stack([np.ones_like(rs), 1.0 / rs, 1.0 / rs**2])
        coef, *_ = np.linalg.lstsq(basis, prof, rcond=None)
        resid = float(np.max(np.abs(basis @ coef - prof)))
        a0, b0, c0 = coef
        tail_value = c0 / self.r_max  # int_{r_max}^inf c/r^2 dr
        # constant and 1/r parts do not integrate to a finite tail; their
        # size is folded into the error bar
        err = resid * self.r_max + (abs(a0) + abs(b0)) * self.r_max
        return box + tail_value, float(err)

    def volume(self) -> float:
        value, _ = self.integrate(lambda r, th, ph: 1.0)
        return float(np.real(value))

    def closed_form_volume(self) -> float:
        a = self.params.a
        r1, r2 = self.r0, self.r_max
        return float(2 * np.pi * (2 * (r2**3 - r1**3) / 3
                                  + 2 * a**2 * (r2 - r1) / 3))


def _scalar_eval(f, params, chart):
    if isinstance(f, wavemodes.FormField):
        f = f.field
    if isinstance(f, TensorField):
        if f.rank != 0:
            raise ValueError("scalar pairing expects rank-0 fields")
        return lambda r, th, ph: complex(
            f.value(params, SpacetimePoint(chart, 0.0, r, th, ph)))
    return lambda r, th, ph: complex(
        f(params, SpacetimePoint(chart, 0.0, r, th, ph)))


def _oneform_eval(w, params, chart):
    if isinstance(w, wavemodes.FormField):
        w = w.field
    if isinstance(w, TensorField):
        if w.rank != 1:
            raise ValueError("one-form pairing expects rank-1 fields")
        return lambda q: np.asarray(w.value(params, q), dtype=complex)
    return lambda q: np.asarray(w(params, q), dtype=complex)


def scalar_pairing(params: KerrParams, f, g,
                   quad: VolumeQuadrature) -> PairingResult:
    fe = _scalar_eval(f, params, quad.chart)
    ge = _scalar_eval(g, params, quad.chart)
    value, err = quad.integrate(lambda r, th, ph: fe(r, th, ph) * ge(r, th, ph))
    return PairingResult("scalar_pairing", value, err,
                         {"r0": quad.r0, "r_max": quad.r_max})


def oneform_pairing(params: KerrParams, w, v,
                    quad: VolumeQuadrature) -> PairingResult:
    we = _oneform_eval(w, params, quad.chart)
    ve = _oneform_eval(v, params, quad.chart)
    gfield = geometry.metric(params, quad.chart)

    def integrand(r, th, ph):
        q = SpacetimePoint(quad.chart, 0.0, r, th, ph)
        return complex((gfield.ginv(q) @ we(q)) @ ve(q))

    value, err = quad.integrate(integrand)
    return PairingResult("oneform_pairing", value, err,
                         {"r0": quad.r0, "r_max": quad.r_max})


# ------------------------------------------------- horizon surface pairing


def constraint_source(params: KerrParams, mdot: float, adot: float):
    """The 1-form delta G gdot(mdot, adot) in the horizon-regular chart."""
    h = perturbations.linearized_kerr(params, mdot, adot, STAR)
    gh = perturbations.trace_reversal(params, h)

    def v(p: KerrParams, point: SpacetimePoint):
        return perturbations.delta(p, gh, point)

    return v


def horizon_surface_pairing(params: KerrParams, v, n_theta: int = 48,
                            n_phi: int = 8, r0: Optional[float] = None
                            ) -> PairingResult:
    """<v, delta(r - r_plus) dr>: the surface integral of v^r against the
    weight (r_plus^2 + a^2 cos^2 theta) sin(theta) at the horizon.

    The optional r0 (inner domain edge, must sit inside the horizon) is
    accepted for interface symmetry with the volume rules; the value is a
    surface term at r_plus and does not depend on it.
    """
    if r0 is not None and not (params.r_minus < r0 < params.r_plus):
        raise ValueError("r0 must lie between the horizon radii")
    ve = _oneform_eval(v, params, STAR)
    gfield = geometry.metric(params, STAR)
    a, rp = params.a, params.r_plus
    xs, wxs = leggauss(n_theta)
    phis = np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False)
    wphi = 2 * np.pi / n_phi
    terms = []
    for x, wx in zip(xs, wxs):
        theta = float(np.arccos(x))
        for phi in phis:
            q = SpacetimePoint(STAR, 0.0, rp, theta, phi)
            vr = (gfield.ginv(q) @ ve(q))[1]
            terms.append(wx * wphi * vr * (rp**2 + (a * x) ** 2))
    return PairingResult("horizon_surface_pairing", tree_sum(terms), 0.0,
                         {"r_plus": rp, "n_theta": n_theta, "n_phi": n_phi})


# ------------------------------------------------------- dt-family pairing


def _omega_s0_components(params: KerrParams, r, x):
    """omega_{b,s0} = (r/rho^2)(dt - a sin^2(theta) dphi) + (r_plus/Delta) dr
    in Boyer-Lindquist components, as functions of (r, x = cos theta)."""
    m, a = params.m, params.a
    rho2 = r * r + (a * x) ** 2
    delta = r * r - 2 * m * r + a * a
    return np.array([r / rho2, params.r_plus / delta, 0.0,
                     -a * r * (1.0 - x * x) / rho2])


def dt_family_pairing(params: KerrParams, eps: float, n_rho: int = 64,
                      n_theta: int = 32) -> complex:
    """<omega_eps, omega_{b,s0}> with omega_eps = rho^4 chi''(rho/eps)/eps^2 dt,
    rho = 1/r: the normal-operator image of the cutoff 1-form chi(rho/eps) dt
    under the 1-form wave operator (Box = -nabla^mu nabla_mu, so the flat
    radial part acts as +d^2/dr^2 on the t-component).
    """
    if not (0 < eps <= 0.1):
        raise ValueError("eps must lie in (0, 0.1]")
    gfield = geometry.metric(params, BL)
    xr, wr = leggauss(n_rho)
    rho = 0.5 * eps * (xr + 1.0)
    wrho = 0.5 * eps * wr
    xt, wt = leggauss(n_theta)
    terms = []
    for p_, wp in zip(rho, wrho):
        r = 1.0 / p_
        f = (p_**4) * cutoff_chi_pp(p_ / eps) / eps**2
        for x, wx in zip(xt, wt):
            q = SpacetimePoint(BL, 0.0, r, float(np.arccos(x)), 0.0)
            nu = _omega_s0_components(params, r, x)
            ginv = gfield.ginv(q)
            rho2 = r * r + (params.a * x) ** 2
            # measure rho^2 sin(theta) dr -> rho2 drho / p^2 after r = 1/rho
            terms.append(wp * wx * 2 * np.pi * f * (ginv[0] @ nu)
                         * rho2 / p_**2)
    return complex(tree_sum(terms))


def dt_family_limit(params: KerrParams, eps_ladder: Optional[Sequence] = None
                    ) -> dict:
    """Extrapolate the dt-family pairing to eps -> 0 and fit the error
    exponent; the limit is 4 pi with an O(eps) error.

    The error is an analytic series in eps on these ladders, so full
    polynomial (Richardson) extrapolation through all rungs recovers the
    limit far more accurately than the leading-order two-point formula.
    """
    if eps_ladder is None:
        eps_ladder = [0.08 / 2**k for k in range(6)]
    eps_ladder = sorted(float(e) for e in eps_ladder)
    values = np.array([dt_family_pairing(params, e, n_rho=96, n_theta=48)
                       for e in eps_ladder])
    vander = np.vander(np.array(eps_ladder), len(eps_ladder),
                       increasing=True)
    limit = np.linalg.solve(vander, values)[0]
    errs = np.abs(values - limit)
    mask = errs > 1e-12
    exponent = float(np.polyfit(np.log(np.array(eps_ladder)[mask]),
                                np.log(errs[mask]), 1)[0]) if mask.sum() >= 2 \
        else float("nan")
    return {"limit": complex(limit), "exponent": exponent,
            "eps": list(eps_ladder), "values": [complex(v) for v in values]}


# --------------------------------------------- gauge insensitivity remark


def remark_gauge_insensitivity(params: KerrParams, omega: TensorField,
                               support: tuple = (3.0, 10.0),
                               n_r_panels: int = 8, n_r_nodes: int = 10,
                               n_theta: int = 24, n_phi: int = 4) -> complex:
    """-2 <delta G delta* omega, omega_{b,s0}> for a smooth decaying test
    1-form omega; the adjoint identity predicts 0.

    Preconditions: omega must be supported inside the stated radial window
    (it is sampled beyond it and rejected if it does not vanish there) and
    must be pole-regular (omega_theta ~ sin(theta), omega_phi ~
    sin^2(theta) near the axis); otherwise the integration by parts behind
    the adjoint identity leaves nonzero boundary terms.
    """
    if omega.rank != 1:
        raise ValueError("remark_gauge_insensitivity expects a 1-form")
    r_lo, r_hi = support
    for r_test in (2.0 * r_hi, 10.0 * r_hi):
        q = SpacetimePoint(omega.chart, 0.0, r_test, 1.1, 0.2)
        if np.max(np.abs(omega.value(params, q))) > 1e-10:
            raise ValueError("omega must be decaying (compactly supported)")
    h = perturbations.delta_star(params, omega)
    gh = perturbations.trace_reversal(params, h)
    gfield = geometry.metric(params, omega.chart)
    quad = VolumeQuadrature(params, r_lo, r_hi, chart=omega.chart,
                            n_r_panels=n_r_panels, n_r_nodes=n_r_nodes,
                            n_theta=n_theta, n_phi=n_phi)

    def integrand(r, th, ph):
        q = SpacetimePoint(omega.chart, 0.0, r, th, ph)
        v = perturbations.delta(params, gh, q)
        nu = _omega_s0_components(params, r, float(np.cos(th)))
        return complex(-2.0 * (gfield.ginv(q) @ v) @ nu)

    value, _ = quad.integrate(integrand)
    return complex(value)
