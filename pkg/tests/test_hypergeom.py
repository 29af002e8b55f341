"""Gauss hypergeometric evaluator: closed-form, transformation and
third-party oracles."""

import mpmath
import numpy as np
import pytest

from kerrmodes.hypergeom import (
    HypergeometricError,
    gauss_2f1,
    gauss_2f1_derivative,
)


def mp_oracle(a, b, c, z):
    mpmath.mp.dps = 30
    return complex(mpmath.hyp2f1(a, b, c, z))


def test_value_at_zero():
    assert gauss_2f1(0.3 + 0.1j, -1.7, 2.2, 0.0) == 1.0


def test_log_closed_form():
    # 2F1(1,1,2,z) = -log(1-z)/z
    z = 0.3
    assert gauss_2f1(1, 1, 2, z) == pytest.approx(-np.log(1 - z) / z, rel=1e-12)
    assert gauss_2f1(1, 1, 2, z) == pytest.approx(1.1889164797957748, rel=1e-10)
    zc = 0.4 + 0.5j
    assert gauss_2f1(1, 1, 2, zc) == pytest.approx(-np.log(1 - zc) / zc, rel=1e-12)


def test_gauss_value_at_one():
    a, b, c = 0.3, 0.2, 2.0
    expected = complex(
        mpmath.gamma(c) * mpmath.gamma(c - a - b)
        / (mpmath.gamma(c - a) * mpmath.gamma(c - b))
    )
    assert gauss_2f1(a, b, c, 1.0) == pytest.approx(expected, rel=1e-12)


def test_gauss_value_requires_convergence():
    with pytest.raises(HypergeometricError, match="z=1"):
        gauss_2f1(1.5, 1.0, 2.0, 1.0)


def test_c_nonpositive_integer_rejected():
    with pytest.raises(HypergeometricError, match="non-positive integer"):
        gauss_2f1(0.5, 0.7, -1.0, 0.3)


def test_terminating_polynomial_any_argument():
    # a = -2: 2F1(-2, b, c, z) = 1 - 2bz/c + b(b+1)z^2/(c(c+1))
    b, c = 1.3 + 0.4j, 0.9
    for z in (0.3, -5.0, 2.0 + 7.0j, 40.0):
        expected = 1 - 2 * b * z / c + b * (b + 1) * z * z / (c * (c + 1))
        assert gauss_2f1(-2, b, c, z) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("z", [0.3, -0.45, 0.2 + 0.4j, -0.1 - 0.5j])
def test_euler_transformation(z):
    a, b, c = 0.37 + 0.21j, 1.24, 2.18 - 0.33j
    lhs = gauss_2f1(a, b, c, z)
    rhs = (1 - z) ** (c - a - b) * gauss_2f1(c - a, c - b, c, z)
    assert abs(lhs - rhs) < 1e-11 * max(1.0, abs(lhs))


@pytest.mark.parametrize("z", [
    0.55,                # Maclaurin disc
    -3.0,                # Pfaff region (z/(z-1) = 0.75 -> inverse-z instead)
    -0.9,                # Pfaff region
    0.92,                # 1-z connection
    0.95 + 0.1j,         # 1-z connection, complex
    3.0 + 0.5j,          # 1/z connection
    -7.0 + 2.0j,         # 1/z connection
    0.8 + 0.35j,         # awkward ring, direct Maclaurin
])
def test_against_mpmath_generic_parameters(z):
    a, b, c = 0.31 + 0.42j, -0.77, 1.63 + 0.11j
    got = gauss_2f1(a, b, c, z)
    want = mp_oracle(a, b, c, z)
    assert abs(got - want) < 1e-10 * max(1.0, abs(want))


@pytest.mark.parametrize("z", [0.5, 0.74, 0.6 + 0.3j, 0.95])
def test_against_mpmath_degenerate_integer_cmab(z):
    # c - a - b = 2l+1 (positive integer), the static-connection case
    for l in (1, 2):
        a, b = float(-l), float(l + 1.0)
        c = 3.0 + 0.75j
        got = gauss_2f1(a, b, c, z)
        want = mp_oracle(a, b, c, z)
        assert abs(got - want) < 1e-10 * max(1.0, abs(want))


def test_derivative_matches_finite_difference():
    a, b, c = 0.4 + 0.2j, 1.1, 2.3
    z, h = 0.25 + 0.1j, 1e-5
    fd = (gauss_2f1(a, b, c, z + h) - gauss_2f1(a, b, c, z - h)) / (2 * h)
    assert gauss_2f1_derivative(a, b, c, z) == pytest.approx(fd, rel=1e-8)
