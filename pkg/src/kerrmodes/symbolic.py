"""One-time symbolic construction of closed-form Kerr quantities.

The Kerr metric (both charts), its coordinate/parameter derivatives, the
tortoise-type chart functions F, T and the Kinnersley tetrad are built
symbolically once per process and lambdified into plain numpy closed
forms. Nothing symbolic happens per evaluation point.

Chart conventions:
  * Boyer-Lindquist coords (t, r, theta, phi), valid for r > r_+.
  * Star coords (t_*, r, theta, phi_*) with t_* = t + F(r),
    phi_* = phi + T(r); F = r_* for r <= 3m, F = -r_* for r >= 4m,
    T = int a/Delta (normalized at 3m) for r <= 3m and 0 for r >= 4m,
    blended on (3m, 4m) by the quintic smoothstep (see `smoothstep`).
"""

from __future__ import annotations

import threading

import numpy as np
import sympy as sp

from .params import BL, STAR, Chart

_M, _A = sp.symbols("m a", real=True, positive=False)
_T, _R, _TH, _PH = sp.symbols("t r theta phi", real=True)
_COORDS = (_T, _R, _TH, _PH)

_LOCK = threading.RLock()
_CACHE: dict = {}


def smoothstep(x):
    """Quintic smoothstep: 0 for x<=0, 6x^5-15x^4+10x^3 on [0,1], 1 for x>=1."""
    x = np.clip(x, 0.0, 1.0)
    return x * x * x * (x * (6.0 * x - 15.0) + 10.0)


def _smoothstep_sym(x):
    poly = 6 * x**5 - 15 * x**4 + 10 * x**3
    return sp.Piecewise((0, x <= 0), (poly, x < 1), (1, True))


def _r_pm():
    root = sp.sqrt(_M**2 - _A**2)
    return _M - root, _M + root


def _delta_sym(r):
    return r**2 - 2 * _M * r + _A**2


def tortoise_sym(r):
    """Closed-form r_*(r) = int (r^2+a^2)/Delta dr with r_*(3m) = 0."""
    rm, rp = _r_pm()
    prim = (
        r
        + ((rp**2 + _A**2) * sp.log((r - rp) / _M) - (rm**2 + _A**2) * sp.log((r - rm) / _M))
        / (rp - rm)
    )
    return prim - prim.subs(r, 3 * _M)


def t_inner_sym(r):
    """Closed-form T(r) = int a/Delta dr with T(3m) = 0 (inner branch)."""
    rm, rp = _r_pm()
    prim = _A / (rp - rm) * sp.log((r - rp) / (r - rm))
    return prim - prim.subs(r, 3 * _M)


def chart_F_sym(r):
    """Piecewise F(r): r_* for r<=3m, -(r_*) for r>=4m, quintic blend between."""
    rs = tortoise_sym(r)
    w = _smoothstep_sym((r - 3 * _M) / _M)
    return sp.Piecewise((rs, r <= 3 * _M), ((1 - 2 * w) * rs, r < 4 * _M), (-rs, True))


def chart_T_sym(r):
    ti = t_inner_sym(r)
    w = _smoothstep_sym((r - 3 * _M) / _M)
    return sp.Piecewise((ti, r <= 3 * _M), ((1 - w) * ti, r < 4 * _M), (0, True))


def _bl_metric_sym():
    r, th = _R, _TH
    delta = _delta_sym(r)
    rho2 = r**2 + _A**2 * sp.cos(th) ** 2
    s2 = sp.sin(th) ** 2
    g = sp.zeros(4, 4)
    g[0, 0] = (delta - _A**2 * s2) / rho2
    g[0, 3] = g[3, 0] = 2 * _M * _A * r * s2 / rho2
    g[1, 1] = -rho2 / delta
    g[2, 2] = -rho2
    g[3, 3] = (_A**2 * delta * s2 - (r**2 + _A**2) ** 2) * s2 / rho2
    return sp.Matrix(g)


def _star_inner_sym():
    """Horizon-regular closed form (valid for r <= 3m):
    Delta/rho2 A^2 - 2 A dr - rho2 dth^2 - s2/rho2 B^2 with
    A = dt* - a s2 dphi*, B = a dt* - (r^2+a^2) dphi*."""
    r, th = _R, _TH
    delta = _delta_sym(r)
    rho2 = r**2 + _A**2 * sp.cos(th) ** 2
    s2 = sp.sin(th) ** 2
    A = sp.Matrix([1, 0, 0, -_A * s2])  # covector components of dt*-a sin^2 dphi*
    Bv = sp.Matrix([_A, 0, 0, -(r**2 + _A**2)])
    dr = sp.Matrix([0, 1, 0, 0])
    dth = sp.Matrix([0, 0, 1, 0])
    return (
        delta / rho2 * A * A.T
        - (A * dr.T + dr * A.T)
        - rho2 * dth * dth.T
        - s2 / rho2 * Bv * Bv.T
    )


def _star_metric_sym():
    """Star-chart metric: displayed horizon-regular form for r<=3m, BL pullback
    with the blended F', T' for r>3m (Delta is bounded away from 0 there)."""
    r = _R
    g_in = _star_inner_sym()

    # pullback form for r > 3m
    Fp = sp.diff(chart_F_sym(r), r)
    Tp = sp.diff(chart_T_sym(r), r)
    J = sp.eye(4)
    J[0, 1] = -Fp  # dt = dt* - F' dr
    J[3, 1] = -Tp  # dphi = dphi* - T' dr
    g_bl = _bl_metric_sym()
    g_pb = J.T * g_bl * J

    g = sp.zeros(4, 4)
    for i in range(4):
        for j in range(4):
            g[i, j] = sp.Piecewise((g_in[i, j], r <= 3 * _M), (g_pb[i, j], True))
    return g


def _metric_sym(chart: Chart):
    return _bl_metric_sym() if chart is BL else _star_metric_sym()


def _np_scalar(v):
    """Coerce to a numpy scalar so dead Piecewise branches yield inf/nan
    instead of raising Python ZeroDivisionError."""
    if isinstance(v, complex) or (hasattr(v, "dtype") and np.iscomplexobj(v)):
        return np.complex128(v)
    return np.float64(v)


def _lambdify(args, expr):
    fn = sp.lambdify(args, expr, modules="numpy", cse=True)

    def wrapped(*a):
        return fn(*(_np_scalar(v) for v in a))

    return wrapped


def _get(key, builder):
    with _LOCK:
        if key not in _CACHE:
            _CACHE[key] = builder()
        return _CACHE[key]


def _coord_derivs(mat):
    """d1[c] = d_c mat for c in coords; d2[c][d] for c<=d in (r, theta)."""
    zeros = sp.zeros(*mat.shape)
    d1 = [zeros, sp.diff(mat, _R), sp.diff(mat, _TH), zeros]
    d2 = {
        (1, 1): sp.diff(mat, _R, 2),
        (1, 2): sp.diff(mat, _R, _TH),
        (2, 2): sp.diff(mat, _TH, 2),
    }
    return d1, d2


def _build_metric_block(chart: Chart, which: str):
    """which in {'g', 'gm', 'ga'}: the metric or its m/a parameter derivative.

    Star-chart parameter derivatives are built from the horizon-regular inner
    closed form only (it is algebraic in (r, theta; m, a) and valid for
    r <= 3m, the region every consumer evaluates on); differentiating the
    blended pullback branch would multiply symbolic cost by ~10 for points
    that are never requested.
    """
    if chart is STAR and which in ("gm", "ga"):
        mat = sp.diff(_star_inner_sym(), _M if which == "gm" else _A)
    else:
        mat = _metric_sym(chart)
        if which == "gm":
            mat = sp.diff(mat, _M)
        elif which == "ga":
            mat = sp.diff(mat, _A)
    d1, d2 = _coord_derivs(mat)
    args = (_M, _A, _R, _TH)
    f0 = _lambdify(args, mat)
    f1 = [_lambdify(args, d) for d in d1]
    f2 = {k: _lambdify(args, v) for k, v in d2.items()}

    def val(m, a, r, th):
        with np.errstate(all="ignore"):
            return np.asarray(f0(m, a, r, th), dtype=float)

    def grad(m, a, r, th):
        with np.errstate(all="ignore"):
            out = np.zeros((4, 4, 4))
            out[1] = np.asarray(f1[1](m, a, r, th), dtype=float)
            out[2] = np.asarray(f1[2](m, a, r, th), dtype=float)
            return out

    def hess(m, a, r, th):
        with np.errstate(all="ignore"):
            out = np.zeros((4, 4, 4, 4))
            out[1, 1] = np.asarray(f2[(1, 1)](m, a, r, th), dtype=float)
            out[1, 2] = out[2, 1] = np.asarray(f2[(1, 2)](m, a, r, th), dtype=float)
            out[2, 2] = np.asarray(f2[(2, 2)](m, a, r, th), dtype=float)
            return out

    return val, grad, hess


def metric_block(chart: Chart, which: str = "g"):
    """Cached (value, gradient, hessian) evaluators for the chart metric or its
    parameter derivatives. Index order: grad[c,a,b] = d_c g_ab."""
    return _get(("metric", chart, which), lambda: _build_metric_block(chart, which))


def _kinnersley_sym():
    r, th = _R, _TH
    delta = _delta_sym(r)
    rho2 = r**2 + _A**2 * sp.cos(th) ** 2
    pbar = r + sp.I * _A * sp.cos(th)
    ell = sp.Matrix([(r**2 + _A**2) / delta, 1, 0, _A / delta])
    nn = sp.Matrix(
        [(r**2 + _A**2) / (2 * rho2), -delta / (2 * rho2), 0, _A / (2 * rho2)]
    )
    mm = sp.Matrix(
        [sp.I * _A * sp.sin(th), 0, 1, sp.I / sp.sin(th)]
    ) / (sp.sqrt(2) * pbar)
    return ell, nn, mm


def _build_tetrad_block():
    ell, nn, mm = _kinnersley_sym()
    args = (_M, _A, _R, _TH)
    out = {}
    for name, vec in (("l", ell), ("n", nn), ("m", mm)):
        stack = sp.Matrix.hstack(vec, sp.diff(vec, _R), sp.diff(vec, _TH))
        fn = _lambdify(args, stack)
        out[name] = fn
    return out


def kinnersley_block():
    """Cached evaluators: for each leg, a (4,3) array [value, d_r, d_theta]."""
    return _get(("tetrad", "kinnersley"), _build_tetrad_block)


def _build_chart_functions():
    args = (_M, _A, _R)
    rs = tortoise_sym(_R)
    F = chart_F_sym(_R)
    T = chart_T_sym(_R)
    return (
        _lambdify(args, rs),
        _lambdify(args, F),
        _lambdify(args, T),
    )


def chart_functions():
    """Cached (r_*, F, T) scalar evaluators of (m, a, r)."""
    return _get(("chart_functions",), _build_chart_functions)


def lambdify_field(exprs, extra_args=(), order=2):
    """Compile chart-coordinate component expressions into numeric evaluators.

    `exprs` is a flat list of sympy expressions in (t, r, theta, phi) and
    (m, a) plus any `extra_args` symbols. Returns (value, jac, hess)
    callables of (m, a, t, r, theta, phi, *extra); jac[c,i] = d_c expr_i,
    hess[c,d,i] = d_c d_d expr_i. Components may be complex.
    """
    vec = sp.Matrix(exprs)
    args = (_M, _A, _T, _R, _TH, _PH) + tuple(extra_args)
    n = len(exprs)

    f0 = _lambdify(args, vec)
    d1 = [sp.diff(vec, c) for c in _COORDS]
    f1 = [_lambdify(args, d) for d in d1]
    if order >= 2:
        f2 = {}
        for ci in range(4):
            for di in range(ci, 4):
                f2[(ci, di)] = _lambdify(args, sp.diff(d1[ci], _COORDS[di]))

    def value(*a):
        with np.errstate(all="ignore"):
            return np.asarray(f0(*a), dtype=complex).reshape(n)

    def jac(*a):
        with np.errstate(all="ignore"):
            out = np.zeros((4, n), dtype=complex)
            for c in range(4):
                out[c] = np.asarray(f1[c](*a), dtype=complex).reshape(n)
            return out

    if order < 2:
        return value, jac, None

    def hess(*a):
        with np.errstate(all="ignore"):
            out = np.zeros((4, 4, n), dtype=complex)
            for (ci, di), fn in f2.items():
                block = np.asarray(fn(*a), dtype=complex).reshape(n)
                out[ci, di] = block
                out[di, ci] = block
            return out

    return value, jac, hess


def coord_symbols():
    """(m, a, t, r, theta, phi) sympy symbols used by `lambdify_field`."""
    return (_M, _A, _T, _R, _TH, _PH)
