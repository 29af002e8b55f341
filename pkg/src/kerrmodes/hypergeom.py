"""Gauss hypergeometric function 2F1 for complex parameters and argument.

Strategy: Maclaurin series inside |z| <= 0.6; Pfaff transformation when
z/(z-1) falls in that disc; the 1-z and 1/z connection formulas when the
relevant parameter combination (c-a-b resp. a-b) is non-integer; direct
Maclaurin for the remaining |z| < 1 points (convergent, possibly slow),
which covers the degenerate integer cases arising from the static
connection problem; the Gauss summation value at z = 1 when
Re(c-a-b) > 0. All powers use the principal logarithm.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gamma as _gamma


class HypergeometricError(ValueError):
    """Parameter/argument combination outside the implemented region."""


_TOL = 1e-16
_MAX_TERMS = 20000


def _is_nonpositive_int(x: complex, tol: float = 1e-12) -> bool:
    x = complex(x)
    return abs(x.imag) < tol and x.real < 0.5 and abs(x.real - round(x.real)) < tol


def _is_int(x: complex, tol: float = 1e-12) -> bool:
    x = complex(x)
    return abs(x.imag) < tol and abs(x.real - round(x.real)) < tol


def _maclaurin(a, b, c, z) -> complex:
    total = term = 1.0 + 0.0j
    for n in range(_MAX_TERMS):
        term = term * (a + n) * (b + n) / ((c + n) * (1.0 + n)) * z
        total += term
        if term == 0.0 or abs(term) < _TOL * max(1.0, abs(total)):
            return total
    raise HypergeometricError(
        f"Maclaurin series did not converge at z={z!r} within {_MAX_TERMS} terms"
    )


def _gauss_value(a, b, c) -> complex:
    """2F1(a, b, c, 1) = Gamma(c)Gamma(c-a-b) / (Gamma(c-a)Gamma(c-b))."""
    if complex(c - a - b).real <= 0:
        raise HypergeometricError("2F1 at z=1 requires Re(c-a-b) > 0")
    return complex(_gamma(c) * _gamma(c - a - b) / (_gamma(c - a) * _gamma(c - b)))


def _connection_one_minus_z(a, b, c, z) -> complex:
    w = 1.0 - z
    t1 = (
        _gamma(c) * _gamma(c - a - b) / (_gamma(c - a) * _gamma(c - b))
    ) * _maclaurin(a, b, a + b - c + 1.0, w)
    t2 = (
        np.power(w, c - a - b)
        * _gamma(c)
        * _gamma(a + b - c)
        / (_gamma(a) * _gamma(b))
    ) * _maclaurin(c - a, c - b, c - a - b + 1.0, w)
    return complex(t1 + t2)


def _connection_inverse_z(a, b, c, z) -> complex:
    w = 1.0 / z
    t1 = (
        _gamma(c) * _gamma(b - a) / (_gamma(b) * _gamma(c - a))
    ) * np.power(-z, -a) * _maclaurin(a, 1.0 - c + a, 1.0 - b + a, w)
    t2 = (
        _gamma(c) * _gamma(a - b) / (_gamma(a) * _gamma(c - b))
    ) * np.power(-z, -b) * _maclaurin(b, 1.0 - c + b, 1.0 - a + b, w)
    return complex(t1 + t2)


def gauss_2f1(a, b, c, z) -> complex:
    """2F1(a, b, c; z), relative accuracy target 1e-12."""
    a, b, c, z = complex(a), complex(b), complex(c), complex(z)
    if _is_nonpositive_int(c) and not (
        (_is_nonpositive_int(a) and a.real >= c.real)
        or (_is_nonpositive_int(b) and b.real >= c.real)
    ):
        raise HypergeometricError("c must not be a non-positive integer")
    if z == 0.0:
        return 1.0 + 0.0j
    if _is_nonpositive_int(a) or _is_nonpositive_int(b):
        return _maclaurin(a, b, c, z)  # terminating polynomial, any z
    if abs(1.0 - z) < 1e-14:
        return _gauss_value(a, b, c)
    if abs(z) <= 0.6:
        return _maclaurin(a, b, c, z)
    w = z / (z - 1.0)
    if abs(w) <= 0.6:
        # Pfaff transformation
        return complex(np.power(1.0 - z, -a) * _maclaurin(a, c - b, c, w))
    if abs(1.0 - z) <= 0.6 and not _is_int(c - a - b):
        return _connection_one_minus_z(a, b, c, z)
    if abs(z) >= 1.7 and not _is_int(a - b):
        return _connection_inverse_z(a, b, c, z)
    if abs(z) < 1.0:
        return _maclaurin(a, b, c, z)
    if abs(w) < 1.0:
        return complex(np.power(1.0 - z, -a) * _maclaurin(a, c - b, c, w))
    raise HypergeometricError(
        f"no convergent representation implemented for z={z!r} with "
        "degenerate parameter differences"
    )


def gauss_2f1_derivative(a, b, c, z) -> complex:
    """d/dz 2F1(a, b, c; z) = (a b / c) 2F1(a+1, b+1, c+1; z)."""
    return complex(a) * complex(b) / complex(c) * gauss_2f1(a + 1, b + 1, c + 1, z)
