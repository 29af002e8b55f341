"""Kerr parameters, charts and spacetime points.

Conventions: metric signature (+, -, -, -); geometric units G = c = 1.
The two charts are Boyer-Lindquist (t, r, theta, phi) and the
horizon-regular Star chart (t*, r, theta, phi*).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class Chart(Enum):
    BOYER_LINDQUIST = "boyer_lindquist"
    STAR = "star"


BL = Chart.BOYER_LINDQUIST
STAR = Chart.STAR


@dataclass(frozen=True)
class KerrParams:
    """Mass m > 0 and spin a with |a| < m (subextreme range)."""

    m: float
    a: float
    r_minus: float = field(init=False)
    r_plus: float = field(init=False)

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError("positive mass required")
        if not abs(self.a) < self.m:
            raise ValueError("subextreme range required")
        root = math.sqrt(self.m**2 - self.a**2)
        object.__setattr__(self, "r_minus", self.m - root)
        object.__setattr__(self, "r_plus", self.m + root)

    @property
    def r0(self) -> float:
        """Default inner cutoff between the two horizons."""
        return 0.5 * (self.r_minus + self.r_plus)

    def delta(self, r):
        """Horizon function Delta = r^2 - 2 m r + a^2."""
        return r * r - 2.0 * self.m * r + self.a * self.a

    def rho2(self, r, theta):
        """rho^2 = r^2 + a^2 cos^2(theta)."""
        c = np.cos(theta)
        return r * r + self.a * self.a * c * c

    def p_scalar(self, r, theta):
        """Killing spinor scalar p = r - i a cos(theta)."""
        return r - 1j * self.a * np.cos(theta)


def horizon_radii(params: KerrParams) -> tuple[float, float]:
    """Return (r_-, r_+); construction already enforces subextremality."""
    return params.r_minus, params.r_plus


@dataclass(frozen=True)
class SpacetimePoint:
    """A point with chart tag. coords = (t, r, theta, phi) in chart order."""

    chart: Chart
    t: float
    r: float
    theta: float
    phi: float

    def __post_init__(self):
        if not (0.0 < self.theta < math.pi):
            raise ValueError("theta must lie strictly inside (0, pi)")

    @property
    def coords(self) -> tuple[float, float, float, float]:
        return (self.t, self.r, self.theta, self.phi)

    def validate(self, params: KerrParams) -> None:
        if self.chart is BL and self.r <= params.r_plus:
            raise ValueError("Boyer-Lindquist chart requires r > r_+")
        if self.chart is STAR and self.r <= params.r0:
            raise ValueError("Star chart requires r > r0")
        if math.sin(self.theta) == 0.0:
            raise ValueError("axis excluded")


def bl_point(r, theta, t=0.0, phi=0.0) -> SpacetimePoint:
    return SpacetimePoint(BL, t, r, theta, phi)


def star_point(r, theta, t=0.0, phi=0.0) -> SpacetimePoint:
    return SpacetimePoint(STAR, t, r, theta, phi)
