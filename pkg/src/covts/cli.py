"""Command-line interface.

Subcommands::

    simulate            write a simulated data matrix to CSV
    estimate-cov        threshold / positive-definitize / kernel-smooth a
                        covariance estimate from a data or matrix file
    estimate-precision  graphical-lasso precision estimation (plain or
                        correlation variant), JSON output
    rates               evaluate rate functions or solve threshold equations
    experiment          run a JSON experiment config, write rows/aggregate/meta
    cv-threshold        temporal-block cross-validated threshold selection
    fig2                figure-reproduction preset (CSV + SVG per combination)

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="covts",
                     description="High-dimensional covariance and precision "
                                 "estimation for time series.")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    sim = sub.add_parser("simulate", help="simulate a process to CSV")
    sim.add_argument("--kind", required=True,
                     choices=["var1", "linear_decay", "iterated_map"])
    sim.add_argument("--p", type=int, required=True)
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--coeff", type=float, default=0.5,
                     help="scalar transition / contraction coefficient")
    sim.add_argument("--gamma", type=float, default=1.0,
                     help="linear_decay tail exponent")
    sim.add_argument("--trunc-lag", type=int, default=None)
    sim.add_argument("--map", dest="map_kind", default="identity",
                     choices=["identity", "abs"])
    sim.add_argument("--innovation", default="gaussian",
                     choices=["gaussian", "student_t"])
    sim.add_argument("--df", type=float, default=9.0)
    sim.add_argument("--out", required=True)

    est = sub.add_parser("estimate-cov", help="covariance estimation")
    est.add_argument("--data", help="p x n data CSV (from `simulate`)")
    est.add_argument("--matrix", help="matrix CSV to threshold directly")
    est.add_argument("--method", default="threshold",
                     choices=["threshold", "pd", "kernel"])
    est.add_argument("--u", type=float, default=0.0, help="threshold level")
    est.add_argument("--v", type=float, default=None,
                     help="eigenvalue floor (default: rule from kept count)")
    est.add_argument("--t", type=float, default=0.5,
                     help="evaluation time for kernel method")
    est.add_argument("--b", type=float, default=None,
                     help="bandwidth (default n^-1/5)")
    est.add_argument("--scheme", default="nadaraya_watson",
                     choices=["nadaraya_watson", "local_linear"])
    est.add_argument("--center", action="store_true")
    est.add_argument("--out", required=True)

    pre = sub.add_parser("estimate-precision", help="graphical lasso")
    pre.add_argument("--data", help="p x n data CSV")
    pre.add_argument("--matrix", help="covariance matrix CSV")
    pre.add_argument("--lam", "--lambda", dest="lam", type=float,
                     required=True)
    pre.add_argument("--variant", default="plain",
                     choices=["plain", "corr"])
    pre.add_argument("--penalize-diagonal", dest="pen_diag",
                     action="store_true", default=True)
    pre.add_argument("--no-penalize-diagonal", dest="pen_diag",
                     action="store_false")
    pre.add_argument("--tol", type=float, default=1e-6)
    pre.add_argument("--max-iter", type=int, default=10000)
    pre.add_argument("--t", type=float, default=None,
                     help="evaluation time: time-varying fit on data")
    pre.add_argument("--b", type=float, default=None)
    pre.add_argument("--out", required=True)
    pre.add_argument("--matrix-out", default=None,
                     help="also write the precision matrix as matrix CSV")

    rat = sub.add_parser("rates", help="rate functions and solvers")
    rat.add_argument("--n", type=float, required=True)
    rat.add_argument("--p", type=int, default=1)
    rat.add_argument("--q", type=float, required=True)
    rat.add_argument("--alpha", type=float, required=True)
    rat.add_argument("--b", type=float, default=None)
    rat.add_argument("--u", type=float, default=None,
                     help="evaluate H/G/G~ at this threshold")
    rat.add_argument("--solve", default=None,
                     choices=["u-diamond", "u-dagger", "u-circ", "u-flat"])
    rat.add_argument("--matrix", default=None,
                     help="truth matrix CSV for D-type equation sides")
    rat.add_argument("--classify", nargs=2, type=float, default=None,
                     metavar=("R", "M"), help="regime classification")
    rat.add_argument("--curve-out", default=None,
                     help="emit (u, D, H, G, bound) CSV + SVG base path")

    exp = sub.add_parser("experiment", help="run an experiment config")
    exp.add_argument("--config", required=True)
    exp.add_argument("--out", required=True)
    exp.add_argument("--workers", type=int, default=None)

    cvp = sub.add_parser("cv-threshold", help="cross-validated threshold")
    cvp.add_argument("--data", required=True)
    cvp.add_argument("--grid", required=True,
                     help="lo,hi,count geometric grid")
    cvp.add_argument("--splits", type=int, default=10)
    cvp.add_argument("--seed", type=int, default=0)

    fig = sub.add_parser("fig2", help="figure-reproduction preset")
    fig.add_argument("--out", required=True)
    fig.add_argument("--seed", type=int, default=2024)
    fig.add_argument("--n", type=int, default=100)
    fig.add_argument("--p", type=int, default=200)
    return parser


def _cmd_simulate(args) -> int:
    from .covmodels import save_data_csv
    from .processes import InnovationLaw, ProcessSpec, simulate
    law = (InnovationLaw() if args.innovation == "gaussian"
           else InnovationLaw(kind="student_t", df=args.df))
    if args.kind == "var1":
        spec = ProcessSpec.var1(args.coeff, p=args.p, seed=args.seed,
                                innovation=law)
    elif args.kind == "linear_decay":
        spec = ProcessSpec.linear_decay(args.gamma, p=args.p, seed=args.seed,
                                        trunc_lag=args.trunc_lag,
                                        innovation=law)
    else:
        spec = ProcessSpec.iterated_map(args.coeff, args.map_kind, p=args.p,
                                        seed=args.seed, innovation=law)
    save_data_csv(args.out, simulate(spec, args.n))
    print(f"wrote {args.p} x {args.n} data matrix to {args.out}")
    return 0


def _cmd_estimate_cov(args) -> int:
    from .covmodels import load_data_csv, load_matrix_csv, save_matrix_csv
    from .estimators import (default_floor, kernel_cov, positive_definitize,
                             sample_cov, threshold)
    if (args.data is None) == (args.matrix is None):
        print("estimate-cov: provide exactly one of --data / --matrix",
              file=sys.stderr)
        return 1
    if args.method == "kernel":
        if args.data is None:
            print("estimate-cov: kernel method needs --data", file=sys.stderr)
            return 1
        z = load_data_csv(args.data)
        b = args.b if args.b is not None else z.shape[1] ** -0.2
        s = kernel_cov(z, args.t, b, scheme=args.scheme)
        est = threshold(s, args.u)
    else:
        s = (sample_cov(load_data_csv(args.data), center=args.center)
             if args.data else load_matrix_csv(args.matrix))
        est = threshold(s, args.u)
    mat = est.matrix
    if args.method == "pd":
        floor = args.v if args.v is not None else default_floor(est)
        if floor <= 0:
            print("estimate-cov: eigenvalue floor must be positive "
                  "(empty estimate?)", file=sys.stderr)
            return 2
        mat = positive_definitize(mat, floor)
    save_matrix_csv(args.out, mat)
    print(f"wrote estimate (u={args.u}, kept={est.kept}) to {args.out}")
    return 0


def _cmd_estimate_precision(args) -> int:
    from .covmodels import load_data_csv, load_matrix_csv
    from .estimators import sample_cov
    from .glasso import glasso_correlation_variant, glasso_fit, tv_glasso
    if (args.data is None) == (args.matrix is None):
        print("estimate-precision: provide exactly one of --data / --matrix",
              file=sys.stderr)
        return 1
    if args.t is not None:
        if args.data is None:
            print("estimate-precision: time-varying fit needs --data",
                  file=sys.stderr)
            return 1
        z = load_data_csv(args.data)
        b = args.b if args.b is not None else z.shape[1] ** -0.2
        sol = tv_glasso(z, args.t, b, args.lam, tol=args.tol,
                        max_iter=args.max_iter)
    else:
        s = (sample_cov(load_data_csv(args.data)) if args.data
             else load_matrix_csv(args.matrix))
        if args.variant == "corr":
            sol = glasso_correlation_variant(s, args.lam, tol=args.tol,
                                             max_iter=args.max_iter)
        else:
            sol = glasso_fit(s, args.lam, penalize_diagonal=args.pen_diag,
                             tol=args.tol, max_iter=args.max_iter)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(sol.to_json())
        fh.write("\n")
    if args.matrix_out:
        from .covmodels import save_matrix_csv
        save_matrix_csv(args.matrix_out, sol.omega)
    print(f"lambda={sol.lam} iterations={sol.iterations} "
          f"kkt_residual={sol.kkt_residual:.3e} -> {args.out}")
    return 0


def _cmd_rates(args) -> int:
    from .covmodels import load_matrix_csv
    from .figures import emit_rate_curves
    from .rates import (G, G_tilde, H, RateProfile, classify_regime,
                        solve_u_circ, solve_u_dagger, solve_u_diamond,
                        solve_u_flat)
    prof = RateProfile(n=args.n, p=args.p, q=args.q, alpha=args.alpha,
                       b=args.b)
    sigma = load_matrix_csv(args.matrix) if args.matrix else None
    print(f"regime={prof.regime} alpha_tilde={prof.alpha_tilde:.6g} "
          f"beta_tilde={prof.beta_tilde:.6g}")
    if args.u is not None:
        print(f"H({args.u})={H(args.u, prof):.6e} "
              f"G({args.u})={G(args.u, prof):.6e} "
              f"G~({args.u})={G_tilde(args.u, prof):.6e}")
    if args.solve:
        if args.solve == "u-diamond":
            root = solve_u_diamond(prof)
            lhs, rhs = H(root, prof), G(root, prof)
        elif args.solve == "u-dagger":
            root = solve_u_dagger(prof, sigma)
            from .covmodels import smallness
            lhs, rhs = smallness(sigma, root).D, H(root, prof)
        elif args.solve == "u-circ":
            root = solve_u_circ(prof, sigma)
            from .covmodels import smallness
            lhs, rhs = smallness(sigma, root).D, G_tilde(root, prof)
        else:
            root = solve_u_flat(prof, sigma)
            from .covmodels import smallness
            lhs = smallness(sigma, root).D_prec
            rhs = min(1.0 / args.n, max(G_tilde(root, prof), H(root, prof)))
        rel = abs(lhs - rhs) / max(lhs, rhs)
        print(f"{args.solve}: root={root:.8e} residual={rel:.3e}")
    if args.classify:
        rep = classify_regime(prof, args.classify[0], args.classify[1])
        print(f"effective_dimension={rep.effective_dimension:.6g} "
              f"phi={rep.phi:.6g} case={rep.case} tie={rep.tie}")
        print(f"threshold rule: {rep.threshold_rule} "
              f"value={rep.threshold_value:.6e}")
    if args.curve_out:
        if sigma is None:
            print("rates: --curve-out needs --matrix", file=sys.stderr)
            return 1
        emitted = emit_rate_curves(prof, sigma, args.curve_out)
        print(f"wrote {emitted['csv']} and {emitted['svg']}")
    return 0


def _cmd_experiment(args) -> int:
    from .harness import ExperimentConfig, run_experiment
    cfg = ExperimentConfig.from_json_file(args.config)
    result = run_experiment(cfg, workers=args.workers)
    paths = result.write(args.out)
    print(f"{len(result.rows)} rows -> {paths['rows']}")
    print(f"aggregates -> {paths['aggregate']}")
    print(f"meta (hash {result.meta['config_hash'][:12]}...) -> "
          f"{paths['meta']}")
    return 0


def _cmd_cv_threshold(args) -> int:
    from .covmodels import load_data_csv
    from .harness import cv_threshold
    lo, hi, count = args.grid.split(",")
    grid = np.exp(np.linspace(np.log(float(lo)), np.log(float(hi)),
                              int(count)))
    result = cv_threshold(load_data_csv(args.data), grid,
                          splits=args.splits, seed=args.seed)
    print(f"selected u={result.u:.6g}")
    for u, score in zip(result.grid, result.mean_scores):
        print(f"  u={u:.6g} mean_score={score:.6e}")
    return 0


def _cmd_fig2(args) -> int:
    from .figures import fig2_preset, fig2_threshold_orderings
    summary = fig2_preset(args.out, master_seed=args.seed, n=args.n, p=args.p)
    orderings = fig2_threshold_orderings(summary)
    print(f"wrote {len(summary['files'])} files to {args.out}")
    print(f"spatial ordering holds: {orderings['spatial_ok']}; "
          f"temporal ordering holds: {orderings['temporal_ok']}")
    return 0


_COMMANDS = {"simulate": _cmd_simulate,
             "estimate-cov": _cmd_estimate_cov,
             "estimate-precision": _cmd_estimate_precision,
             "rates": _cmd_rates,
             "experiment": _cmd_experiment,
             "cv-threshold": _cmd_cv_threshold,
             "fig2": _cmd_fig2}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except BrokenPipeError:
        return 0
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"covts {args.command}: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
