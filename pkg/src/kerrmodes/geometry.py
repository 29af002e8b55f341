"""Kerr background geometry: metric, curvature, tortoise coordinate, charts.

All evaluators are closed-form (generated once in `symbolic`); curvature
comes either from analytic first/second metric derivatives or from the
documented 4th-order finite-difference stencil (used for residual tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import BL, STAR, Chart, KerrParams, SpacetimePoint
from . import symbolic

# 4th-order central-difference weights for the first derivative.
_FD4_OFFSETS = (-2, -1, 1, 2)
_FD4_WEIGHTS = (1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0)


def fd_step(r: float) -> float:
    """Documented step policy for finite differencing: h = max(1e-4, 1e-4 r)."""
    return max(1e-4, 1e-4 * abs(r))


@dataclass(frozen=True)
class MetricField:
    """Metric of the Kerr background in a fixed chart."""

    params: KerrParams
    chart: Chart

    def _args(self, point: SpacetimePoint):
        if point.chart is not self.chart:
            raise ValueError("point chart does not match metric chart")
        point.validate(self.params)
        return (self.params.m, self.params.a, point.r, point.theta)

    def g(self, point: SpacetimePoint) -> np.ndarray:
        val, _, _ = symbolic.metric_block(self.chart, "g")
        return val(*self._args(point))

    def dg(self, point: SpacetimePoint) -> np.ndarray:
        """dg[c, a, b] = d_c g_ab (closed form; t and phi derivatives vanish)."""
        _, grad, _ = symbolic.metric_block(self.chart, "g")
        return grad(*self._args(point))

    def d2g(self, point: SpacetimePoint) -> np.ndarray:
        _, _, hess = symbolic.metric_block(self.chart, "g")
        return hess(*self._args(point))

    def ginv(self, point: SpacetimePoint) -> np.ndarray:
        return np.linalg.inv(self.g(point))

    def sqrt_det(self, point: SpacetimePoint) -> float:
        return math.sqrt(abs(np.linalg.det(self.g(point))))


def metric(params: KerrParams, chart: Chart = BL) -> MetricField:
    return MetricField(params, chart)


def _christoffel_from(g: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """Gamma^a_bc from a metric value and its first derivatives."""
    ginv = np.linalg.inv(g)
    # C[e,b,c] = (g_eb,c + g_ec,b - g_bc,e)/2
    C = 0.5 * (np.einsum("ceb->ebc", dg) + np.einsum("bec->ebc", dg) - dg)
    return np.einsum("ae,ebc->abc", ginv, C)


def christoffel(field: MetricField, point: SpacetimePoint) -> np.ndarray:
    """Gamma^a_bc from the analytic metric derivatives."""
    return _christoffel_from(field.g(point), field.dg(point))


def dchristoffel(field: MetricField, point: SpacetimePoint) -> np.ndarray:
    """Analytic dGamma[d, a, b, c] = d_d Gamma^a_bc."""
    g = field.g(point)
    dg = field.dg(point)
    d2g = field.d2g(point)
    ginv = np.linalg.inv(g)
    dginv = -np.einsum("ae,def,fb->dab", ginv, dg, ginv)
    C = 0.5 * (np.einsum("ceb->ebc", dg) + np.einsum("bec->ebc", dg) - dg)
    # dC[d,e,b,c] = d_d C[e,b,c]
    dC = 0.5 * (
        np.einsum("dceb->debc", d2g) + np.einsum("dbec->debc", d2g) - np.einsum("debc->debc", d2g)
    )
    return np.einsum("dae,ebc->dabc", dginv, C) + np.einsum("ae,debc->dabc", ginv, dC)


def _shifted_point(point: SpacetimePoint, axis: int, delta: float) -> SpacetimePoint:
    c = list(point.coords)
    c[axis] += delta
    return SpacetimePoint(point.chart, *c)


def fd_dchristoffel(field: MetricField, point: SpacetimePoint) -> np.ndarray:
    """dGamma[d, a, b, c] by the documented 4th-order stencil in (r, theta)."""
    out = np.zeros((4, 4, 4, 4))
    for axis, h in ((1, fd_step(point.r)), (2, 1e-4)):
        acc = np.zeros((4, 4, 4))
        for off, w in zip(_FD4_OFFSETS, _FD4_WEIGHTS):
            acc += w * christoffel(field, _shifted_point(point, axis, off * h))
        out[axis] = acc / h
    return out


def _ricci_from(gamma: np.ndarray, dgamma: np.ndarray) -> np.ndarray:
    # R_ab = d_c Gamma^c_ab - d_a Gamma^c_cb + Gamma^c_cd Gamma^d_ab - Gamma^c_ad Gamma^d_cb
    ric = (
        np.einsum("ccab->ab", dgamma)
        - np.einsum("accb->ab", dgamma)
        + np.einsum("ccd,dab->ab", gamma, gamma)
        - np.einsum("cad,dcb->ab", gamma, gamma)
    )
    return ric


def ricci(field: MetricField, point: SpacetimePoint, method: str = "fd") -> np.ndarray:
    """Ricci tensor; 'fd' differentiates Christoffels with the 4th-order
    stencil (independent residual test), 'analytic' uses closed forms."""
    gamma = christoffel(field, point)
    if method == "fd":
        dgamma = fd_dchristoffel(field, point)
    elif method == "analytic":
        dgamma = dchristoffel(field, point)
    else:
        raise ValueError("method must be 'fd' or 'analytic'")
    return _ricci_from(gamma, dgamma)


def riemann_lower(field: MetricField, point: SpacetimePoint, method: str = "analytic") -> np.ndarray:
    """All-lower Riemann tensor R_abcd =
    (g_ad,bc + g_bc,ad - g_ac,bd - g_bd,ac)/2 + g_ef(G^e_ad G^f_bc - G^e_ac G^f_bd)."""
    g = field.g(point)
    gamma = christoffel(field, point)
    if method == "analytic":
        d2g = field.d2g(point)
    elif method == "fd":
        d2g = np.zeros((4, 4, 4, 4))
        for axis, h in ((1, fd_step(point.r)), (2, 1e-4)):
            acc = np.zeros((4, 4, 4))
            for off, w in zip(_FD4_OFFSETS, _FD4_WEIGHTS):
                acc += w * field.dg(_shifted_point(point, axis, off * h))
            d2g[axis] = acc / h
        d2g = 0.5 * (d2g + np.einsum("cdab->dcab", d2g))
    else:
        raise ValueError("method must be 'fd' or 'analytic'")
    term = 0.5 * (
        np.einsum("bcad->abcd", d2g)
        + np.einsum("adbc->abcd", d2g)
        - np.einsum("bdac->abcd", d2g)
        - np.einsum("acbd->abcd", d2g)
    )
    quad = np.einsum("ef,ead,fbc->abcd", g, gamma, gamma) - np.einsum(
        "ef,eac,fbd->abcd", g, gamma, gamma
    )
    return term + quad


def tortoise(params: KerrParams, r: float) -> float:
    """Closed-form tortoise coordinate with r_*(3m) = 0."""
    if r <= params.r_plus:
        raise ValueError("tortoise coordinate requires r > r_+")
    rs_fn, _, _ = symbolic.chart_functions()
    return float(rs_fn(params.m, params.a, r))


def chart_F(params: KerrParams, r: float) -> float:
    if r <= params.r_plus:
        raise ValueError("F(r) requires r > r_+")
    _, F_fn, _ = symbolic.chart_functions()
    return float(F_fn(params.m, params.a, r))


def chart_T(params: KerrParams, r: float) -> float:
    if r <= params.r_plus:
        raise ValueError("T(r) requires r > r_+")
    _, _, T_fn = symbolic.chart_functions()
    return float(T_fn(params.m, params.a, r))


def chart_transform(params: KerrParams, point: SpacetimePoint) -> SpacetimePoint:
    """Map a point to the other chart: t_* = t + F(r), phi_* = phi + T(r)."""
    point.validate(params)
    F = chart_F(params, point.r)
    T = chart_T(params, point.r)
    if point.chart is BL:
        return SpacetimePoint(STAR, point.t + F, point.r, point.theta, point.phi + T)
    return SpacetimePoint(BL, point.t - F, point.r, point.theta, point.phi - T)
