"""Metric perturbations: the linearized Kerr family, gauge operators
delta*, delta, trace reversal, and tetrad projections.

Conventions:
    (delta* w)_ab = (nabla_a w_b + nabla_b w_a)/2
    (delta h)_mu  = -h_{mu nu ;}{}^nu          (codifferential, with minus)
    divergence(h) = +nabla^nu h_{nu mu}        (= -delta h; the background
                                                pairing computations use this)
    G_g(h) = h - (1/2) g tr_g h                 (trace reversal)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry, symbolic
from .fields import TensorField, from_callable
from .params import Chart, KerrParams, SpacetimePoint


@dataclass
class PerturbationField:
    """Symmetric 2-tensor field h_ab with derivative access."""

    params: KerrParams
    field: TensorField

    @property
    def chart(self) -> Chart:
        return self.field.chart

    def h(self, point: SpacetimePoint) -> np.ndarray:
        return self.field.value(self.params, point)

    def dh(self, point: SpacetimePoint) -> np.ndarray:
        return self.field.jac(self.params, point)

    def d2h(self, point: SpacetimePoint) -> np.ndarray:
        return self.field.hess(self.params, point)

    def trace(self, point: SpacetimePoint) -> complex:
        g = geometry.metric(self.params, self.chart)
        return complex(np.einsum("ab,ab->", g.ginv(point), self.h(point)))

    def trace_free_part(self, point: SpacetimePoint) -> np.ndarray:
        g = geometry.metric(self.params, self.chart)
        return self.h(point) - 0.25 * self.trace(point) * g.g(point)

    def projections(self, frame) -> dict:
        """The ten tetrad projections h_XY, X, Y in {l, n, m, mbar}."""
        h = self.h(frame.point)
        legs = frame.legs()
        keys = [
            ("l", "l"), ("l", "n"), ("n", "n"), ("l", "m"), ("n", "m"),
            ("l", "mbar"), ("n", "mbar"), ("m", "m"), ("m", "mbar"), ("mbar", "mbar"),
        ]
        return {
            f"{x}{y}": complex(np.einsum("ab,a,b->", h, legs[x], legs[y])) for x, y in keys
        }


def linearized_kerr(params: KerrParams, mdot: float, adot: float, chart: Chart) -> PerturbationField:
    """gdot_b = d/ds g_{b + s(mdot, adot)}|_0 with analytic derivatives.

    In each chart this is the parameter derivative of that chart's
    closed-form metric components at fixed coordinates.
    """
    vm, jm, hm = symbolic.metric_block(chart, "gm")
    va, ja, ha = symbolic.metric_block(chart, "ga")

    def combine(fm, fa):
        def fn(p: KerrParams, point: SpacetimePoint):
            if chart is not Chart.BOYER_LINDQUIST and point.r > 3.0 * p.m:
                raise ValueError(
                    "star-chart linearized family is provided on the "
                    "horizon-regular region r <= 3m"
                )
            args = (p.m, p.a, point.r, point.theta)
            return mdot * fm(*args) + adot * fa(*args)

        return fn

    field = TensorField(
        chart,
        2,
        combine(vm, va),
        lambda p, q: combine(jm, ja)(p, q),
        lambda p, q: combine(hm, ha)(p, q),
        name=f"gdot({mdot},{adot})",
    )
    return PerturbationField(params, field)


def linearized_kerr_fd(params: KerrParams, mdot: float, adot: float, chart: Chart, eps: float = 1e-6):
    """Central-difference oracle (g_{b+eps bdot} - g_{b-eps bdot})/(2 eps)."""

    def fn(p: KerrParams, point: SpacetimePoint):
        val, _, _ = symbolic.metric_block(chart, "g")
        up = val(p.m + eps * mdot, p.a + eps * adot, point.r, point.theta)
        dn = val(p.m - eps * mdot, p.a - eps * adot, point.r, point.theta)
        return (up - dn) / (2.0 * eps)

    return PerturbationField(params, from_callable(chart, fn, 2, name="gdot_fd"))


def delta_star(params: KerrParams, omega: TensorField) -> PerturbationField:
    """Symmetrized covariant derivative of a 1-form."""
    if omega.rank != 1:
        raise ValueError("delta_star acts on 1-forms")
    gfield = geometry.metric(params, omega.chart)

    def fn(p: KerrParams, point: SpacetimePoint):
        w = omega.value(p, point)
        dw = omega.jac(p, point)
        gamma = geometry.christoffel(gfield, point)
        sym = 0.5 * (dw + dw.T)
        return sym - np.einsum("cab,c->ab", gamma, w)

    return PerturbationField(params, from_callable(omega.chart, fn, 2, name="delta_star"))


def trace_reversal(params: KerrParams, h: PerturbationField) -> PerturbationField:
    """G_g h = h - (1/2) g tr_g h."""
    gfield = geometry.metric(params, h.chart)

    def fn(p: KerrParams, point: SpacetimePoint):
        g = gfield.g(point)
        hv = h.h(point)
        tr = np.einsum("ab,ab->", np.linalg.inv(g), hv)
        return hv - 0.5 * tr * g

    def jac(p: KerrParams, point: SpacetimePoint):
        g = gfield.g(point)
        dg = gfield.dg(point)
        ginv = np.linalg.inv(g)
        dginv = -np.einsum("ae,cef,fb->cab", ginv, dg, ginv)
        hv = h.h(point)
        dhv = h.dh(point)
        tr = np.einsum("ab,ab->", ginv, hv)
        dtr = np.einsum("cab,ab->c", dginv, hv) + np.einsum("ab,cab->c", ginv, dhv)
        return dhv - 0.5 * (np.einsum("c,ab->cab", dtr, g) + tr * dg)

    field = TensorField(h.chart, 2, fn, jac, None, name="G(" + h.field.name + ")")
    return PerturbationField(params, field)


def divergence(params: KerrParams, h: PerturbationField, point: SpacetimePoint) -> np.ndarray:
    """(div h)_mu = nabla^nu h_{nu mu}."""
    gfield = geometry.metric(params, h.chart)
    ginv = gfield.ginv(point)
    gamma = geometry.christoffel(gfield, point)
    dh = h.dh(point)
    hv = h.h(point)
    nabla = dh - np.einsum("dca,db->cab", gamma, hv) - np.einsum("dcb,ad->cab", gamma, hv)
    return np.einsum("ca,cab->b", ginv, nabla)


def delta(params: KerrParams, h: PerturbationField, point: SpacetimePoint) -> np.ndarray:
    """(delta h)_mu = -h_{mu nu;}{}^nu."""
    return -divergence(params, h, point)
