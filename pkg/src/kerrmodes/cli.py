"""Command-line front end: runs the verification suites and persists
reports.

Subcommands map one-to-one onto the library modules (geometry, harmonics,
teukolsky, scan, modes, invariants, pairings) plus ``all``.  Each run
writes ``report.json`` (and any suite artifacts: ``scan_*.csv``,
``basis_*.csv``, ``invariants_*.csv``, ``pairings.json``) into the output
directory.  Exit status: 0 if every check passed, 1 if any check failed,
2 for configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import (fields, geometry, invariants, pairings, perturbations,
               sphere, teukolsky, wavemodes)
from .config import ALL_SUITES, ConfigError, RunConfig, load_config
from .params import BL, STAR, KerrParams, SpacetimePoint
from .report import Report, ReportBuilder, merge_reports, print_summary


def _tag(m: float, a: float) -> str:
    return f"m{m:g}_a{a:g}"


def _theta_nodes(n: int) -> np.ndarray:
    x, _ = np.polynomial.legendre.leggauss(n)
    return np.arccos(x)


# ----------------------------------------------------------------- suites


def cmd_geometry(cfg: RunConfig) -> Report:
    b = ReportBuilder("geometry", cfg.to_dict())
    thetas = _theta_nodes(cfg.grids["n_theta"])
    for m, a in cfg.params:
        p = KerrParams(m, a)
        tag = _tag(m, a)
        rs = np.geomspace(1.05 * p.r_plus, 1e3 * m, cfg.grids["n_r"])
        rs_star = np.geomspace(1.05 * p.r_plus, 2.9 * m, cfg.grids["n_r"])
        for chart, grid_r in ((BL, rs), (STAR, rs_star)):
            gf = geometry.metric(p, chart)

            def worst_ricci(gf=gf, chart=chart, grid_r=grid_r):
                return max(
                    np.max(np.abs(geometry.ricci(
                        gf, SpacetimePoint(chart, 0.0, r, th, 0.3))))
                    for r in grid_r for th in thetas)

            b.timed(
                f"geometry.ricci_flat.{chart.name}.{tag}",
                "the Kerr background is vacuum: the finite-difference "
                "Ricci tensor vanishes on a log-spaced grid outside the "
                "horizon", cfg.tol("ricci_flat"), worst_ricci)

        gf = geometry.metric(p, BL)

        def worst_inverse(gf=gf, grid_r=rs):
            eye = np.eye(4)
            return max(
                np.max(np.abs(gf.g(q) @ gf.ginv(q) - eye))
                for r in grid_r[::2] for th in thetas[::2]
                for q in [SpacetimePoint(BL, 0.0, r, th, 0.3)])

        b.timed(
            f"geometry.metric_inverse.{tag}",
            "the closed-form inverse metric inverts the metric",
            cfg.tol("metric_inverse"), worst_inverse)
    return b.build()


def cmd_harmonics(cfg: RunConfig) -> Report:
    b = ReportBuilder("harmonics", cfg.to_dict())
    grid = sphere.SphericalGrid()
    lmax = cfg.grids["lmax"]
    os.makedirs(cfg.out_dir, exist_ok=True)
    for s in range(-2, 3):

        def worst(s=s):
            worst = 0.0
            for l in range(abs(s), lmax + 1):
                for mm in range(-l, l + 1):
                    Y = sphere.sw_harmonic(s, l, mm, grid)
                    lap = sphere.minus_sw_laplacian_s(Y)
                    ev = sphere.sw_eigenvalue(s, l)
                    if ev != l * (l + 1) - s * (s + 1):
                        return float("inf")
                    worst = max(worst, float(np.max(np.abs(
                        lap.values - ev * Y.values))))
            return worst

        b.timed(
            f"harmonics.eigen_residual.s{s}",
            "spin-weighted harmonics diagonalize the spin-weighted "
            "Laplacian with eigenvalue l(l+1) - s(s+1)",
            cfg.tol("sw_eigen_residual"), worst)
        sphere.export_basis_csv(
            os.path.join(cfg.out_dir, f"basis_s{s}.csv"), s, lmax, grid)
    return b.build()


_SEPARATION_CASES = [
    (2, 2, 1, 0.3), (-2, 3, -2, 0.5 + 0.2j), (1, 1, 1, 0.4 + 0.1j),
    (0, 2, 0, 0.3), (-1, 2, -1, 0.5 + 0.2j), (2, 3, 2, 0.3),
]


def _spheroidal_pair(p, s, sigma, k, l):
    lmin = max(abs(s), abs(k))
    pairs = sphere.spheroidal_eigen(p, s, sigma, k, l + 8,
                                    n_branches=l - lmin + 1)
    return pairs[l - lmin]


def _theta_derivatives(pair, th, h=1e-3):
    pts = np.array([th - 2 * h, th - h, th, th + h, th + 2 * h])
    v = pair.theta_function(pts)
    d1 = (v[0] - 8 * v[1] + 8 * v[3] - v[4]) / (12 * h)
    d2 = (-v[0] + 16 * v[1] - 30 * v[2] + 16 * v[3] - v[4]) / (12 * h * h)
    return complex(v[2]), complex(d1), complex(d2)


def _separation_residual(p, s, l, k, sigma) -> float:
    pair = _spheroidal_pair(p, s, sigma, k, l)
    mode = teukolsky.ModeSpec(s, sigma, k, l=l, lam=pair.eigenvalue)
    ode = teukolsky.separate(p, mode)
    ser = teukolsky.frobenius_horizon(
        ode, teukolsky.indicial_horizon(p, s, k, sigma)[0], 40)
    sol = teukolsky.integrate_radial(
        ode, p.r_plus + 0.2 * ser.trust_radius, 12.0, series=ser)
    op = teukolsky.assemble_Ts(p, s)
    worst = 0.0
    for r in (3.0, 6.0, 10.0):
        R, dR = sol(r)
        d2R = -(ode.p1(r) * dR + ode.p0(r) * R) / ode.p2(r)
        for th in (0.7, 1.9):
            S0, S1, S2 = _theta_derivatives(pair, th)
            res = op.apply_separated(sigma, k, r, th, R, dR, d2R, S0, S1, S2)
            worst = max(worst, abs(res) / max(abs(R), 1.0))
    return worst


def cmd_teukolsky(cfg: RunConfig) -> Report:
    b = ReportBuilder("teukolsky", cfg.to_dict())
    cases = _SEPARATION_CASES[: cfg.grids["separation_cases"]]
    for m, a in cfg.params:
        p = KerrParams(m, a)
        tag = _tag(m, a)
        for s, l, k, sigma in cases:
            b.timed(
                f"teukolsky.separation_residual.{tag}.s{s}_l{l}_k{k}"
                f"_sig{sigma}",
                "the Teukolsky operator annihilates the separated mode "
                "built from the spheroidal eigenpair and the radial "
                "Frobenius/ODE solution",
                cfg.tol("separation_residual"),
                lambda p=p, s=s, l=l, k=k, sigma=sigma:
                _separation_residual(p, s, l, k, sigma))

        def indicial_roots(p=p):
            worst = 0.0
            for s, l in ((0, 2), (1, 2), (2, 3), (-2, 2)):
                r1, r2 = teukolsky.normal_indicial(s, l)
                for root in (r1, r2):
                    worst = max(worst, abs(
                        teukolsky.normal_indicial_polynomial(s, l, root)))
            return worst

        b.timed(
            f"teukolsky.normal_indicial_roots.{tag}",
            "the normal-operator indicial polynomial vanishes exactly on "
            "its stated boundary exponents",
            cfg.tol("indicial_exact"), indicial_roots)

        def growing_floor(p=p):
            coeffs = [abs(teukolsky.static_connection(
                p, s, l, k).growing_coefficient)
                for s, l, k in ((2, 2, 1), (-2, 2, 2))]
            return min(coeffs)

        b.timed(
            f"teukolsky.static_growing_branch.{tag}",
            "static (sigma=0, k!=0) horizon-outgoing solutions connect to "
            "the growing branch at infinity: no decaying static mode",
            cfg.tol("growing_branch_floor"), growing_floor,
            lower_bound=True)

        def energy_positive(p=p):
            r = np.linspace(p.r_plus, 40.0, 2000)
            cand = (r - p.r_plus) * np.exp(-r)
            ei = teukolsky.energy_identity_k0(p, 1, 2, r, cand)
            return min(ei.gradient_term, ei.potential_term)

        b.timed(
            f"teukolsky.energy_identity_positive.{tag}",
            "the k=0 static energy identity is strictly positive on a "
            "nontrivial decaying candidate, excluding k=0 static modes",
            0.0, energy_positive, lower_bound=True)
    return b.build()


_SCAN_CASES = [(2, 2, 2), (-2, 2, 2), (1, 1, 1), (-1, 1, 1), (0, 0, 0)]


def cmd_scan(cfg: RunConfig) -> Report:
    b = ReportBuilder("scan", cfg.to_dict())
    os.makedirs(cfg.out_dir, exist_ok=True)
    win = cfg.sigma_window
    m, a = cfg.params[0]
    p = KerrParams(m, a)
    for s, k, l in _SCAN_CASES:
        res = teukolsky.wronskian_scan(
            p, s, k, l, re_range=tuple(win["re"]),
            im_range=tuple(win["im"]), step=win["step"],
            exclude=win["exclude"])
        res.export_csv(os.path.join(cfg.out_dir,
                                    f"scan_s{s}_k{k}_l{l}.csv"))
        b.check(
            f"scan.wronskian_floor.s{s}_k{k}_l{l}",
            "the mode Wronskian stays bounded away from zero over the "
            "upper-half sigma window minus a disc at 0: no nonzero-"
            "frequency modes", res.min_abs, cfg.tol("scan_floor"),
            ok=res.min_abs >= cfg.tol("scan_floor"))
        b.check(
            f"scan.no_winding_cells.s{s}_k{k}_l{l}",
            "no winding cell of the Wronskian survives refinement",
            float(len(res.surviving_cells)), 0.0,
            ok=not res.surviving_cells)
    return b.build()


def cmd_modes(cfg: RunConfig) -> Report:
    b = ReportBuilder("modes", cfg.to_dict())
    m, a = cfg.params[0]
    p = KerrParams(m, a)
    pts = [SpacetimePoint(BL, 0.0, r, th, 0.3)
           for r in (3.0, 5.0, 9.0) for th in (0.7, 1.9)]
    om0, oms0 = wavemodes.coulomb_potential(p, BL)

    def catalog_worst():
        worst = 0.0
        box = wavemodes.box_oneform(p, oms0)
        cod = wavemodes.codifferential(p, oms0)
        for q in pts:
            worst = max(worst, float(np.max(np.abs(box.value(p, q)))))
            worst = max(worst, abs(complex(cod.value(p, q))))
        return worst

    b.timed(
        "modes.oneform_zero_mode_residual",
        "the stationary 1-form zero mode is harmonic and coclosed",
        cfg.tol("catalog_residual"), catalog_worst)

    def maxwell_worst():
        F = wavemodes.maxwell_from_potential(p, om0)
        worst = 0.0
        for q in pts:
            dF, delF = wavemodes.maxwell_residual(p, F, q)
            worst = max(worst, dF, delF)
        from .tetrads import kinnersley
        for q in pts:
            phi_p, _, phi_m = wavemodes.maxwell_scalars(F, kinnersley(p, q))
            worst = max(worst, abs(phi_p), abs(phi_m))
        return worst

    b.timed(
        "modes.maxwell_residual",
        "the Coulomb field strength solves the Maxwell equations and is "
        "doubly aligned (extreme Maxwell scalars vanish)",
        cfg.tol("catalog_residual"), maxwell_worst)

    def coulomb_fit():
        F = wavemodes.maxwell_from_potential(p, om0)
        _, resid = wavemodes.fit_coulomb_constant(p, F, pts)
        return resid

    b.timed(
        "modes.coulomb_profile_fit",
        "the middle Maxwell scalar of the Coulomb field fits a single "
        "constant times (r - i a cos(theta))^(-2)",
        cfg.tol("coulomb_fit_residual"), coulomb_fit)

    def static_solve():
        src = lambda r: np.exp(-((r - 4.0) / 2.0) ** 2)
        sol = wavemodes.static_scalar_solve(p, 2, 1, src)
        rs = np.array([2.0, 4.0, 9.0, 25.0])
        return wavemodes.static_residual(p, 2, 1, sol, src, rs)

    b.timed(
        "modes.static_solve_residual",
        "the static scalar solver produces a decaying solution with small "
        "equation residual for a compact source",
        cfg.tol("static_solve_residual"), static_solve)
    return b.build()


def _compact_gauge_oneform(seed: int, chart=BL):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=4)

    def val(p, q):
        r, th = q.r, q.theta
        if not (3.0 < r < 10.0):
            return np.zeros(4)
        bump = ((r - 3.0) * (10.0 - r) / 12.25) ** 4
        s, co = np.sin(th), np.cos(th)
        return bump * np.array([c[0] * (1 + 0.3 * co),
                                c[1] * (1 - 0.2 * co),
                                c[2] * s * co, c[3] * s * s])

    return fields.from_callable(chart, val, rank=1, name=f"gauge{seed}")


def cmd_invariants(cfg: RunConfig) -> Report:
    b = ReportBuilder("invariants", cfg.to_dict())
    os.makedirs(cfg.out_dir, exist_ok=True)
    rng = np.random.default_rng(cfg.seed)
    m, a = cfg.params[0]
    p = KerrParams(m, a)
    tag = _tag(m, a)
    gf = geometry.metric(p, BL)
    hdot = perturbations.linearized_kerr(p, 1.0, 0.7, BL)

    def linearized_einstein():
        worst = 0.0
        for r in np.geomspace(1.1 * p.r_plus, 100.0, 6):
            q = SpacetimePoint(BL, 0.0, float(r), 1.1, 0.3)
            W = invariants.linearized_riemann(p, hdot, q)
            ginv = gf.ginv(q)
            R = geometry.riemann_lower(gf, q)
            hup = ginv @ hdot.h(q) @ ginv
            dric = (np.einsum("ac,abcd->bd", ginv, W)
                    - np.einsum("ac,abcd->bd", hup, R))
            worst = max(worst, float(np.max(np.abs(dric))))
        return worst

    b.timed(
        f"invariants.linearized_einstein.{tag}",
        "the Kerr family derivative solves the linearized vacuum "
        "Einstein equations (linearized Ricci vanishes)",
        cfg.tol("linearized_einstein"), linearized_einstein)

    def closed_forms():
        worst = 0.0
        for _ in range(cfg.grids["invariant_points"]):
            mdot, adot = rng.normal(size=2)
            r = float(rng.uniform(2.5, 40.0))
            th = float(rng.uniform(0.4, 2.7))
            q = SpacetimePoint(BL, 0.0, r, th, 0.3)
            h = perturbations.linearized_kerr(p, mdot, adot, BL)
            xi, zeta = invariants.invariant_pair(p, h, q)
            xi_ref = mdot
            zeta_ref = 2 * p.a**2 * mdot - 3 * p.m * p.a * adot
            scale = max(abs(xi_ref), abs(zeta_ref), 1.0)
            worst = max(worst, abs(xi - xi_ref) / scale,
                        abs(zeta - zeta_ref) / scale)
        return worst

    b.timed(
        f"invariants.closed_forms.{tag}",
        "the curvature invariants of the Kerr family derivative match "
        "their closed forms in (mdot, adot) pointwise",
        cfg.tol("invariant_closed_form"), closed_forms)

    def gauge_insensitivity():
        worst = 0.0
        for trial in range(cfg.grids["gauge_trials"]):
            w = _compact_gauge_oneform(int(rng.integers(1, 2**31)))
            h = perturbations.delta_star(p, w)
            q = SpacetimePoint(BL, 0.0, float(rng.uniform(4.0, 9.0)),
                               float(rng.uniform(0.5, 2.6)), 0.3)
            xi, zeta = invariants.invariant_pair(p, h, q)
            worst = max(worst, abs(xi), abs(zeta))
        return worst

    b.timed(
        f"invariants.gauge_insensitivity.{tag}",
        "pure-gauge perturbations delta* omega leave both curvature "
        "invariants at zero", cfg.tol("gauge_insensitivity"),
        gauge_insensitivity)

    def pd_fit():
        truth = invariants.PDParameters(mdot=0.8, adot=-0.3, ndot=0.1,
                                        cdot=0.05)
        qs = [SpacetimePoint(BL, 0.0, r, th, 0.3)
              for r, th in ((3.0, 0.8), (5.0, 1.4), (8.0, 2.1), (12.0, 0.6))]
        data = [invariants.pd_closed_forms(p, truth, q) for q in qs]
        fit = invariants.pd_family_fit(p, qs, [d[0] for d in data],
                                       [d[1] for d in data])
        est = fit.parameters
        return max(abs(est.mdot - truth.mdot), abs(est.adot - truth.adot),
                   abs(est.ndot - truth.ndot), abs(est.cdot - truth.cdot))

    b.timed(
        f"invariants.pd_family_fit.{tag}",
        "fitting invariant samples recovers the generating "
        "mass/spin/NUT/acceleration parameter derivatives",
        1e-8, pd_fit)

    def decay_slope():
        slopes = invariants.decay_probe(
            p, lambda pp: perturbations.linearized_kerr(pp, 1.0, 0.5, BL))
        # the family invariants are constant along the radial ray
        return abs(slopes["zeta"])

    b.timed(
        f"invariants.family_decay_slope.{tag}",
        "the invariant of the Kerr family derivative is constant along "
        "radial rays (zero log-log slope)",
        cfg.tol("decay_slope_window"), decay_slope)

    invariants.export_invariants_csv(
        os.path.join(cfg.out_dir, f"invariants_{tag}.csv"), p, hdot,
        np.geomspace(3.0, 30.0, 4), [0.7, 1.4, 2.1])
    return b.build()


def cmd_pairings(cfg: RunConfig) -> Report:
    b = ReportBuilder("pairings", cfg.to_dict())
    os.makedirs(cfg.out_dir, exist_ok=True)
    m, a = cfg.params[0]
    p = KerrParams(m, a)
    results = []

    def eight_pi():
        res = pairings.horizon_surface_pairing(
            p, pairings.constraint_source(p, 1.0, 0.0))
        results.append(res)
        return abs(res.value - 8 * np.pi)

    b.timed(
        "pairings.horizon_mass_8pi",
        "the mass-derivative constraint source pairs with the horizon "
        "dual state to exactly 8 pi", cfg.tol("pairing_8pi"), eight_pi)

    def rotation_zero():
        res = pairings.horizon_surface_pairing(
            p, pairings.constraint_source(p, 0.0, 1.0))
        results.append(res)
        return abs(res.value)

    b.timed(
        "pairings.horizon_rotation_zero",
        "the rotation-derivative constraint source pairs with the "
        "horizon dual state to zero", cfg.tol("pairing_rotation"),
        rotation_zero)

    limit_holder = {}

    def four_pi():
        out = pairings.dt_family_limit(p)
        limit_holder.update(out)
        return abs(out["limit"] - 4 * np.pi)

    b.timed(
        "pairings.dt_family_4pi",
        "the extrapolated dt-family pairing with the 1-form zero mode "
        "equals 4 pi", cfg.tol("pairing_4pi"), four_pi)
    b.check(
        "pairings.dt_family_exponent",
        "the dt-family pairing error decays with fitted exponent at "
        "least 0.9 in the cutoff scale",
        limit_holder.get("exponent", float("nan")),
        cfg.tol("pairing_exponent_floor"),
        ok=limit_holder.get("exponent", 0.0)
        >= cfg.tol("pairing_exponent_floor"))
    pairings.export_pairings_json(
        os.path.join(cfg.out_dir, "pairings.json"), results)
    return b.build()


_SUITE_FUNCS = {
    "geometry": cmd_geometry,
    "harmonics": cmd_harmonics,
    "teukolsky": cmd_teukolsky,
    "scan": cmd_scan,
    "modes": cmd_modes,
    "invariants": cmd_invariants,
    "pairings": cmd_pairings,
}


def cmd_all(cfg: RunConfig) -> Report:
    suites = [s for s in ALL_SUITES if s in cfg.suites]
    if cfg.jobs > 1 and len(suites) > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            reports = list(pool.map(lambda s: _SUITE_FUNCS[s](cfg), suites))
    else:
        reports = [_SUITE_FUNCS[s](cfg) for s in suites]
    return merge_reports("all", reports, cfg.to_dict())


# -------------------------------------------------------------------- CLI


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kerrmodes",
        description="Numerical verification suites for mode analysis of "
                    "perturbations of subextreme Kerr.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(ALL_SUITES) + ["all"]:
        sp = sub.add_parser(name, help=f"run the {name} suite(s)")
        sp.add_argument("--config", default=None,
                        help="path to a JSON/YAML run configuration")
        sp.add_argument("--out", default=None,
                        help="output directory (overrides config)")
        sp.add_argument("--jobs", type=int, default=None,
                        help="worker pool size (overrides config)")
        sp.add_argument("--seed", type=int, default=None,
                        help="random seed (overrides config)")
        sp.add_argument("--suite", action="append", default=None,
                        help="restrict 'all' to the named suite "
                             "(repeatable)")
    return parser


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    raw = cfg.to_dict()
    if args.out is not None:
        raw["out_dir"] = args.out
    if args.jobs is not None:
        raw["jobs"] = args.jobs
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.suite is not None:
        for s in args.suite:
            if s not in ALL_SUITES:
                raise ConfigError(f"unknown suite: {s}")
        raw["suites"] = args.suite
    from .config import from_dict
    return from_dict(raw)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = _apply_overrides(cfg, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        os.makedirs(cfg.out_dir, exist_ok=True)
    except OSError as exc:
        print(f"cannot create output directory: {exc}", file=sys.stderr)
        return 2
    if args.command == "all":
        report = cmd_all(cfg)
    else:
        report = _SUITE_FUNCS[args.command](cfg)
    try:
        report.write_json(os.path.join(cfg.out_dir, "report.json"))
    except OSError as exc:
        print(f"cannot write report: {exc}", file=sys.stderr)
        return 2
    print_summary(report)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
