"""Spin-weighted calculus on the unit sphere.

Conventions (documented and tested):
  * s=0 harmonics are the classical spherical harmonics with the
    Condon-Shortley phase.
  * Y^[s]_{lm}(theta, phi) = sqrt((2l+1)/4pi) d^l_{m,-s}(theta) e^{i m phi},
    where d^l is the Wigner small-d matrix. This normalizes the edth ladder to
        eth      Y^[s] = +sqrt((l-s)(l+s+1)/2) Y^[s+1],
        eth'     Y^[s] = -sqrt((l+s)(l-s+1)/2) Y^[s-1],
    with eth = (1/sqrt2)(d_theta + (i/sin) d_phi - s cot) and the conjugate
    form for eth'. Hence -2 eth' eth has eigenvalue l(l+1) - s(s+1).
  * Sphere operators use delta = -divergence, Delta = -tr grad^2, and
    delta* = plain symmetrized gradient, matching the spacetime conventions.

Tensor fields are stored in dyad components with m = (1/sqrt2)(d_theta +
(i/sin theta) d_phi): a 1-form has spin (+1, -1) components, a symmetric
2-tensor spin (+2, 0, -2) components. All geometric operators then reduce
to the edth ladder and are spectrally exact on band-limited fields.
"""

from __future__ import annotations

import csv
import threading
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.special import eval_jacobi, gammaln

_LOCK = threading.RLock()
_THETA_TABLES: dict = {}

SQRT2 = np.sqrt(2.0)


class ConvergenceError(RuntimeError):
    """Raised when an eigenvalue has not converged at the given truncation."""


# ------------------------------------------------------------------ grid


@dataclass(frozen=True)
class SphericalGrid:
    """Gauss-Legendre nodes in cos(theta) times a uniform phi grid."""

    n_theta: int = 48
    n_phi: int = 96

    def __post_init__(self):
        if self.n_theta < 4 or self.n_phi < 4:
            raise ValueError("grid too small")

    @property
    def nodes(self):
        x, w = np.polynomial.legendre.leggauss(self.n_theta)
        # descending x = ascending theta in (0, pi); interior only
        order = np.argsort(-x)
        return x[order], w[order]

    @property
    def theta(self) -> np.ndarray:
        x, _ = self.nodes
        return np.arccos(x)

    @property
    def weights(self) -> np.ndarray:
        return self.nodes[1]

    @property
    def phi(self) -> np.ndarray:
        return np.arange(self.n_phi) * (2.0 * np.pi / self.n_phi)

    @property
    def lmax(self) -> int:
        """Default band limit resolvable by this grid."""
        return min(self.n_theta - 2, self.n_phi // 2 - 1)

    def integrate(self, values) -> complex:
        """Integral over S^2 with measure sin(theta) dtheta dphi."""
        values = np.asarray(values)
        return complex(
            (2.0 * np.pi / self.n_phi) * np.einsum("j,jk->", self.weights, values)
        )


# --------------------------------------------------------- Wigner-d basis


def _wigner_d(l: int, mp: int, mn: int, theta: np.ndarray) -> np.ndarray:
    """Wigner small-d matrix element d^l_{mp, mn}(theta), Jacobi form."""
    k = min(l + mn, l - mn, l + mp, l - mp)
    if k == l + mn:
        a, lam = mp - mn, mp - mn
    elif k == l - mn:
        a, lam = mn - mp, 0
    elif k == l + mp:
        a, lam = mn - mp, 0
    else:
        a, lam = mp - mn, mp - mn
    b = 2 * (l - k) - a
    # sqrt(C(2l-k, k+a) / C(k+b, b))
    ln_norm = 0.5 * (
        gammaln(2 * l - k + 1)
        - gammaln(k + a + 1)
        - gammaln(2 * l - 2 * k - a + 1)
        - gammaln(k + b + 1)
        + gammaln(b + 1)
        + gammaln(k + 1)
    )
    sign = -1.0 if lam % 2 else 1.0
    half = 0.5 * theta
    return (
        sign
        * np.exp(ln_norm)
        * np.sin(half) ** a
        * np.cos(half) ** b
        * eval_jacobi(k, a, b, np.cos(theta))
    )


def sw_theta_function(s: int, l: int, m: int, theta: np.ndarray) -> np.ndarray:
    """theta-part S^[s]_{lm}: Y^[s]_{lm} = S^[s]_{lm}(theta) e^{i m phi}."""
    if l < max(abs(s), abs(m)):
        raise ValueError("need l >= max(|s|, |m|)")
    return np.sqrt((2 * l + 1) / (4.0 * np.pi)) * _wigner_d(l, m, -s, theta)


def _theta_table(s: int, lmax: int, grid: SphericalGrid) -> np.ndarray:
    """Cached table[l, m + lmax, j] = S^[s]_{lm}(theta_j); zero for invalid lm."""
    key = (s, lmax, grid.n_theta)
    with _LOCK:
        if key not in _THETA_TABLES:
            theta = grid.theta
            table = np.zeros((lmax + 1, 2 * lmax + 1, grid.n_theta))
            for l in range(abs(s), lmax + 1):
                for m in range(-l, l + 1):
                    table[l, m + lmax] = sw_theta_function(s, l, m, theta)
            _THETA_TABLES[key] = table
        return _THETA_TABLES[key]


# ------------------------------------------------------------------ fields


@dataclass(frozen=True)
class SpinWeightedField:
    """Complex spin-s field sampled on a SphericalGrid."""

    s: int
    grid: SphericalGrid
    values: np.ndarray  # (n_theta, n_phi) complex
    warning: bool = False  # set when input was not band-limited

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.n_theta, self.grid.n_phi):
            raise ValueError("values shape does not match the grid")
        object.__setattr__(self, "values", v)


def decompose(fld: SpinWeightedField, lmax: Optional[int] = None) -> np.ndarray:
    """Coefficients c[l, m+lmax] of fld over Y^[s]_{lm}, l <= lmax."""
    grid = fld.grid
    if lmax is None:
        lmax = grid.lmax
    table = _theta_table(fld.s, lmax, grid)
    fm = np.fft.fft(fld.values, axis=1)  # fm[j, m] = sum_k f e^{-i m phi_k}
    coeffs = np.zeros((lmax + 1, 2 * lmax + 1), dtype=complex)
    scale = 2.0 * np.pi / grid.n_phi
    w = grid.weights
    for m in range(-lmax, lmax + 1):
        col = fm[:, m % grid.n_phi]
        coeffs[:, m + lmax] = scale * np.einsum("lj,j,j->l", table[:, m + lmax], w, col)
    return coeffs


def reconstruct(s: int, coeffs: np.ndarray, grid: SphericalGrid) -> SpinWeightedField:
    lmax = coeffs.shape[0] - 1
    table = _theta_table(s, lmax, grid)
    # theta profile per m, then inverse FFT over phi
    fm = np.zeros((grid.n_theta, grid.n_phi), dtype=complex)
    for m in range(-lmax, lmax + 1):
        fm[:, m % grid.n_phi] += np.einsum("lj,l->j", table[:, m + lmax], coeffs[:, m + lmax])
    values = np.fft.ifft(fm, axis=1) * grid.n_phi
    return SpinWeightedField(s, grid, values)


def _band_limited(fld: SpinWeightedField, coeffs: np.ndarray) -> bool:
    back = reconstruct(fld.s, coeffs, fld.grid)
    scale = max(1.0, float(np.max(np.abs(fld.values))))
    return float(np.max(np.abs(back.values - fld.values))) < 1e-8 * scale


def sw_eigenvalue(s: int, l: int) -> int:
    """Eigenvalue of -2 eth' eth on Y^[s]_l: l(l+1) - s(s+1) (exact)."""
    if l < abs(s):
        raise ValueError("need l >= |s|")
    return l * (l + 1) - s * (s + 1)


def sw_harmonic(s: int, l: int, m: int, grid: SphericalGrid) -> SpinWeightedField:
    prof = sw_theta_function(s, l, m, grid.theta)
    values = np.outer(prof, np.exp(1j * m * grid.phi))
    return SpinWeightedField(s, grid, values)


def _ladder(fld: SpinWeightedField, raise_spin: bool) -> SpinWeightedField:
    s = fld.s
    coeffs = decompose(fld)
    warn = not _band_limited(fld, coeffs)
    lmax = coeffs.shape[0] - 1
    ls = np.arange(lmax + 1)[:, None].astype(float)
    if raise_spin:
        factor = np.sqrt(np.maximum((ls - s) * (ls + s + 1), 0.0) / 2.0)
        out_s = s + 1
    else:
        factor = -np.sqrt(np.maximum((ls + s) * (ls - s + 1), 0.0) / 2.0)
        out_s = s - 1
    out = reconstruct(out_s, factor * coeffs, fld.grid)
    return replace(out, warning=warn or fld.warning)


def eth(fld: SpinWeightedField) -> SpinWeightedField:
    """eth = (1/sqrt2)(d_theta + (i/sin) d_phi - s cot), applied spectrally."""
    return _ladder(fld, True)


def eth_prime(fld: SpinWeightedField) -> SpinWeightedField:
    """eth' = (1/sqrt2)(d_theta - (i/sin) d_phi + s cot), applied spectrally."""
    return _ladder(fld, False)


def sw_laplacian(fld: SpinWeightedField) -> SpinWeightedField:
    """-(eth eth' + eth' eth): the tensor Laplacian on each dyad component."""
    a = eth(eth_prime(fld))
    b = eth_prime(eth(fld))
    return replace(a, values=-(a.values + b.values), warning=a.warning or b.warning)


def minus_sw_laplacian_s(fld: SpinWeightedField) -> SpinWeightedField:
    """-2 eth' eth (the spin-weighted spherical Laplacian of the text)."""
    out = eth_prime(eth(fld))
    return replace(out, values=-2.0 * out.values)


# -------------------------------------------------- tensor fields on S^2


@dataclass(frozen=True)
class OneFormS2:
    """1-form in dyad components: plus = m^a w_a (spin +1), minus (spin -1)."""

    plus: SpinWeightedField
    minus: SpinWeightedField

    def coords(self):
        """(w_theta, w_phi) coordinate components."""
        p, m = self.plus.values, self.minus.values
        sin = np.sin(self.plus.grid.theta)[:, None]
        return (p + m) / SQRT2, 1j * sin * (m - p) / SQRT2


@dataclass(frozen=True)
class SymTensorS2:
    """Symmetric 2-tensor in dyad components (spin +2, 0, -2).
    pm = m^a mbar^b T_ab, so trace = 2 pm."""

    pp: SpinWeightedField
    pm: SpinWeightedField
    mm: SpinWeightedField

    def trace(self) -> SpinWeightedField:
        return replace(self.pm, values=2.0 * self.pm.values)

    def coords(self):
        """2x2 array of coordinate components T_ab over the grid."""
        grid = self.pm.grid
        sin = np.sin(grid.theta)[:, None]
        m_low = np.array([np.full_like(sin, 1.0 / SQRT2), 1j * sin / SQRT2], dtype=object)
        out = np.empty((2, 2), dtype=object)
        for a in range(2):
            for b in range(2):
                ma, mb = m_low[a], m_low[b]
                out[a, b] = (
                    self.pp.values * np.conj(ma) * np.conj(mb)
                    + self.pm.values * (ma * np.conj(mb) + np.conj(ma) * mb)
                    + self.mm.values * ma * mb
                )
        return out


def _zero(s: int, grid: SphericalGrid) -> SpinWeightedField:
    return SpinWeightedField(s, grid, np.zeros((grid.n_theta, grid.n_phi), complex))


def d_scalar(f: SpinWeightedField) -> OneFormS2:
    """Exterior derivative of a function (spin 0)."""
    if f.s != 0:
        raise ValueError("d acts on spin-0 functions")
    return OneFormS2(eth(f), eth_prime(f))


def hodge_star(w: OneFormS2) -> OneFormS2:
    """(star w)_a = eps_a{}^b w_b: multiplies the spin +-1 parts by -+i."""
    return OneFormS2(
        replace(w.plus, values=-1j * w.plus.values),
        replace(w.minus, values=1j * w.minus.values),
    )


def delta_one_form(w: OneFormS2) -> SpinWeightedField:
    """delta w = -div w = -(eth' w_+ + eth w_-)."""
    a, b = eth_prime(w.plus), eth(w.minus)
    return replace(a, values=-(a.values + b.values), warning=a.warning or b.warning)


def delta_star(w: OneFormS2) -> SymTensorS2:
    """Symmetrized gradient of a 1-form."""
    half = 0.5 * (eth(w.minus).values + eth_prime(w.plus).values)
    pm = SpinWeightedField(0, w.plus.grid, half)
    return SymTensorS2(eth(w.plus), pm, eth_prime(w.minus))


def delta_star0(w: OneFormS2) -> SymTensorS2:
    """Trace-free symmetric gradient: delta* + (1/2) g delta (exactly
    trace-free in dyad components)."""
    ds = delta_star(w)
    return SymTensorS2(ds.pp, _zero(0, w.plus.grid), ds.mm)


def delta_tensor(T: SymTensorS2) -> OneFormS2:
    """delta T = -div T on symmetric 2-tensors."""
    plus = eth_prime(T.pp).values + eth(T.pm).values
    minus = eth(T.mm).values + eth_prime(T.pm).values
    grid = T.pm.grid
    return OneFormS2(
        SpinWeightedField(1, grid, -plus), SpinWeightedField(-1, grid, -minus)
    )


def laplacian_one_form(w: OneFormS2) -> OneFormS2:
    return OneFormS2(sw_laplacian(w.plus), sw_laplacian(w.minus))


def laplacian_tensor(T: SymTensorS2) -> SymTensorS2:
    return SymTensorS2(sw_laplacian(T.pp), sw_laplacian(T.pm), sw_laplacian(T.mm))


def scalar_times_metric(f: SpinWeightedField) -> SymTensorS2:
    """f times the round metric (dyad components (0, f, 0))."""
    return SymTensorS2(_zero(2, f.grid), f, _zero(-2, f.grid))


def tensor_harmonics(l: int, m: int, grid: SphericalGrid, kind: str, rank: int):
    """Scalar/vector type spherical tensor harmonics built from Y_{lm}.

    kind='scalar': rank 0 -> Y; rank 1 -> dY; rank 2 -> {'trace': Y g,
    'tracefree': delta*_0 dY}. kind='vector': rank 1 -> V = star dY;
    rank 2 -> delta* V.
    """
    Y = sw_harmonic(0, l, m, grid)
    if kind == "scalar":
        if rank == 0:
            return Y
        if rank == 1:
            return d_scalar(Y)
        if rank == 2:
            return {"trace": scalar_times_metric(Y), "tracefree": delta_star0(d_scalar(Y))}
    elif kind == "vector":
        if l < 1:
            raise ValueError("vector harmonics need l >= 1")
        V = hodge_star(d_scalar(Y))
        if rank == 1:
            return V
        if rank == 2:
            return delta_star(V)
    raise ValueError("kind must be 'scalar' or 'vector' with rank 0|1|2")


# ------------------------------------------------------ spheroidal operator


@dataclass(frozen=True)
class AngularEigenpair:
    s: int
    k: int
    l_label: int
    eigenvalue: complex
    coeffs: np.ndarray  # over l = lmin..lmax in the Y^[s]_{l,k} basis
    lmin: int
    drift: float  # |change| between truncations (convergence estimate)

    def theta_function(self, theta: np.ndarray) -> np.ndarray:
        out = np.zeros_like(np.asarray(theta, dtype=complex))
        for i, c in enumerate(self.coeffs):
            if c != 0.0:
                out = out + c * sw_theta_function(self.s, self.lmin + i, self.k, theta)
        return out


_MATRIX_PARTS: dict = {}


def _matrix_parts(s: int, k: int, lmax: int):
    """Cached sigma-independent pieces of the angular operator matrix:
    diag(l(l+1) - s^2) and the <cos theta>, <sin^2 theta> matrix elements."""
    lmin = max(abs(s), abs(k))
    if lmax < lmin:
        raise ValueError("lmax below the smallest admissible l")
    key = (s, k, lmax)
    with _LOCK:
        if key not in _MATRIX_PARTS:
            grid = SphericalGrid(n_theta=max(2 * lmax + 8, 16), n_phi=4)
            theta, w = grid.theta, grid.weights
            profs = np.array(
                [sw_theta_function(s, l, k, theta) for l in range(lmin, lmax + 1)]
            )
            cosm = 2.0 * np.pi * np.einsum(
                "ij,j,j,kj->ik", profs, np.cos(theta), w, profs
            )
            sin2m = 2.0 * np.pi * np.einsum(
                "ij,j,j,kj->ik", profs, np.sin(theta) ** 2, w, profs
            )
            ls = np.arange(lmin, lmax + 1, dtype=float)
            diag = np.diag(ls * (ls + 1) - s * s).astype(complex)
            _MATRIX_PARTS[key] = (diag, cosm, sin2m)
        return _MATRIX_PARTS[key]


def _angular_matrix(params, s: int, sigma: complex, k: int, lmax: int) -> np.ndarray:
    """Matrix of the sigma-dependent angular operator in the Y^[s]_{l,k} basis."""
    diag, cosm, sin2m = _matrix_parts(s, k, lmax)
    return diag + (sigma * params.a) ** 2 * sin2m + 2.0 * s * sigma * params.a * cosm


def spheroidal_operator(params, s: int, sigma: complex, k: int, lmax: int) -> np.ndarray:
    """Dense (complex symmetric) truncation; at sigma=0 it is exactly
    diag(l(l+1) - s^2)."""
    return _angular_matrix(params, s, sigma, k, lmax)


def _tracked_eigen(params, s, sigma, k, lmax):
    lmin = max(abs(s), abs(k))
    mat = _angular_matrix(params, s, sigma, k, lmax)
    vals, vecs = np.linalg.eig(mat)
    # branch tracking: assign each sigma=0 label (unit vector e_l) the
    # eigenvector with maximal overlap
    order = []
    taken = set()
    for i in range(len(vals)):
        overlaps = np.abs(vecs[i, :])
        for j in np.argsort(-overlaps):
            if j not in taken:
                taken.add(j)
                order.append(j)
                break
    return [(vals[j], vecs[:, j]) for j in order], lmin


def spheroidal_eigen(params, s: int, sigma: complex, k: int, lmax: int, n_branches: Optional[int] = None):
    """Eigenpairs labelled by their sigma=0 angular degree l, with a
    truncation-convergence estimate (lmax vs lmax+4)."""
    pairs, lmin = _tracked_eigen(params, s, sigma, k, lmax)
    pairs_big, _ = _tracked_eigen(params, s, sigma, k, lmax + 4)
    if n_branches is None:
        n_branches = max(1, (lmax - lmin + 1) // 2)
    out = []
    for idx in range(n_branches):
        lam, vec = pairs[idx]
        lam_big, _ = pairs_big[idx]
        drift = abs(lam - lam_big)
        if drift > 1e-8 * max(1.0, abs(lam)):
            raise ConvergenceError(
                f"eigenvalue for l={lmin + idx} drifted {drift:.2e} between "
                f"truncations {lmax} and {lmax + 4}; increase lmax"
            )
        # normalize phase: largest coefficient real positive
        j = int(np.argmax(np.abs(vec)))
        vec = vec / vec[j] * abs(vec[j])
        out.append(
            AngularEigenpair(s, k, lmin + idx, complex(lam), vec, lmin, float(drift))
        )
    return out


# ------------------------------------------------------------- CSV export


def export_basis_csv(path, s: int, lmax: int, grid: SphericalGrid) -> None:
    """Basis table: (l, m, node index, real, imag) of the theta-profiles."""
    table = _theta_table(s, lmax, grid)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["l", "m", "node", "real", "imag"])
        for l in range(abs(s), lmax + 1):
            for m in range(-l, l + 1):
                for j in range(grid.n_theta):
                    writer.writerow([l, m, j, repr(table[l, m + lmax, j]), repr(0.0)])
