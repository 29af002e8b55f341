"""Generic tensor fields on a chart with analytic or finite-difference
derivative access.

A `TensorField` of rank k evaluates to a complex array of shape (4,)*k;
`jac` prepends one derivative index and `hess` two: jac[c, ...] = d_c T,
hess[c, d, ...] = d_c d_d T. Fields are built either from sympy component
expressions (closed-form derivatives) or from a plain callable (documented
4th-order central differences in r and theta; fields are then assumed
stationary and axisymmetric).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import symbolic
from .geometry import fd_step
from .params import Chart, KerrParams, SpacetimePoint

_FD1_OFFSETS = (-2, -1, 1, 2)
_FD1_WEIGHTS = (1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0)
_FD2_OFFSETS = (-2, -1, 0, 1, 2)
_FD2_WEIGHTS = (-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0)


def _shift(point: SpacetimePoint, axis: int, d: float) -> SpacetimePoint:
    c = list(point.coords)
    c[axis] += d
    return SpacetimePoint(point.chart, *c)


def fd_second_step(r: float) -> float:
    """Larger step for second differences (balances truncation/roundoff)."""
    return max(3e-3, 3e-4 * abs(r))


@dataclass
class TensorField:
    """Rank-k tensor field on a fixed chart."""

    chart: Chart
    rank: int
    _value: Callable
    _jac: Optional[Callable] = None
    _hess: Optional[Callable] = None
    name: str = ""

    def _check(self, point: SpacetimePoint):
        if point.chart is not self.chart:
            raise ValueError(f"field lives on chart {self.chart}, got {point.chart}")

    def value(self, params: KerrParams, point: SpacetimePoint) -> np.ndarray:
        self._check(point)
        return np.asarray(self._value(params, point), dtype=complex)

    def jac(self, params: KerrParams, point: SpacetimePoint) -> np.ndarray:
        self._check(point)
        if self._jac is not None:
            return np.asarray(self._jac(params, point), dtype=complex)
        shape = (4,) + (4,) * self.rank
        out = np.zeros(shape, dtype=complex)
        for axis in (1, 2):
            h = fd_step(point.r) if axis == 1 else 1e-4
            acc = 0.0
            for off, w in zip(_FD1_OFFSETS, _FD1_WEIGHTS):
                acc = acc + w * self.value(params, _shift(point, axis, off * h))
            out[axis] = acc / h
        return out

    def hess(self, params: KerrParams, point: SpacetimePoint) -> np.ndarray:
        self._check(point)
        if self._hess is not None:
            return np.asarray(self._hess(params, point), dtype=complex)
        shape = (4, 4) + (4,) * self.rank
        out = np.zeros(shape, dtype=complex)
        steps = {1: fd_second_step(point.r), 2: 1e-3}
        for axis in (1, 2):
            h = steps[axis]
            acc = 0.0
            for off, w in zip(_FD2_OFFSETS, _FD2_WEIGHTS):
                acc = acc + w * self.value(params, _shift(point, axis, off * h))
            out[axis, axis] = acc / (h * h)
        # mixed r-theta derivative by nested first differences
        hr, ht = steps[1], steps[2]
        acc = 0.0
        for oi, wi in zip(_FD1_OFFSETS, _FD1_WEIGHTS):
            row = 0.0
            for oj, wj in zip(_FD1_OFFSETS, _FD1_WEIGHTS):
                row = row + wj * self.value(params, _shift(_shift(point, 1, oi * hr), 2, oj * ht))
            acc = acc + wi * row
        out[1, 2] = out[2, 1] = acc / (hr * ht)
        return out


def from_exprs(chart: Chart, comps: Sequence, rank: int, order: int = 2, name: str = "") -> TensorField:
    """Build a field from sympy expressions in (m, a, t, r, theta, phi).

    `comps` is a flat list of length 4**rank in C-order.
    """
    n = 4**rank
    if len(comps) != n:
        raise ValueError("component count does not match rank")
    value_fn, jac_fn, hess_fn = symbolic.lambdify_field(list(comps), order=order)
    shape = (4,) * rank

    def value(params, point):
        return value_fn(params.m, params.a, *point.coords).reshape(shape)

    def jac(params, point):
        return jac_fn(params.m, params.a, *point.coords).reshape((4,) + shape)

    if order < 2:
        return TensorField(chart, rank, value, jac, None, name=name)

    def hess(params, point):
        return hess_fn(params.m, params.a, *point.coords).reshape((4, 4) + shape)

    return TensorField(chart, rank, value, jac, hess, name=name)


def from_callable(chart: Chart, fn: Callable, rank: int, name: str = "") -> TensorField:
    """Field from a plain (params, point) -> components callable; derivatives
    by the documented finite-difference policy."""
    return TensorField(chart, rank, fn, None, None, name=name)


def zero_field(chart: Chart, rank: int) -> TensorField:
    shape = (4,) * rank
    z = np.zeros(shape, dtype=complex)
    zj = np.zeros((4,) + shape, dtype=complex)
    zh = np.zeros((4, 4) + shape, dtype=complex)
    return TensorField(chart, rank, lambda p, q: z, lambda p, q: zj, lambda p, q: zh, name="0")
