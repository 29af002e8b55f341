"""Shared fixtures and small numeric helpers for the test suite."""

import numpy as np
import pytest

from kerrmodes.params import BL, STAR, KerrParams, SpacetimePoint


@pytest.fixture(scope="session")
def kerr_fast() -> KerrParams:
    """m=1, a=0.6 (rational horizon radii 0.2, 1.8)."""
    return KerrParams(1.0, 0.6)


@pytest.fixture(scope="session")
def kerr_rapid() -> KerrParams:
    """m=1, a=0.9 (the large-spin regime most results target)."""
    return KerrParams(1.0, 0.9)


@pytest.fixture(scope="session")
def kerr_schw() -> KerrParams:
    """Effectively Schwarzschild (spin exactly zero)."""
    return KerrParams(1.0, 0.0)


def bl(t, r, th, ph=0.3) -> SpacetimePoint:
    return SpacetimePoint(BL, t, r, th, ph)


def star(t, r, th, ph=0.3) -> SpacetimePoint:
    return SpacetimePoint(STAR, t, r, th, ph)


def fit_exponent(rs, values):
    """Least-squares slope of log|v| against log r (decay exponent)."""
    rs = np.asarray(rs, dtype=float)
    mags = np.abs(np.asarray(values))
    if np.any(mags == 0.0):
        raise ValueError("cannot fit a decay exponent through an exact zero")
    slope, _ = np.polyfit(np.log(rs), np.log(mags), 1)
    return slope
