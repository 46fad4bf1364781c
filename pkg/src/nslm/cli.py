"""Command-line front end: ``nslm generate | solve | bench | order``.

Exit codes: 0 success, 1 non-convergence, 2 usage error, 3 I/O or parse error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import bench
from .cave import (GenerationError, InstanceFormatError, default_start, generate_instance,
                   load_instance, save_instance, smallest_singular_value)
from .ilmm import InsufficientDecay, fit_convergence_order, solve
from .problem import SolverConfig

EXIT_OK, EXIT_NONCONVERGED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


def default_seed() -> int:
    return int(os.environ.get("NSLM_SEED", "0"))


def _n_arg(text: str) -> int:
    n = int(text)
    if n < 2:
        raise argparse.ArgumentTypeError("n must be >= 2")
    return n


def _density_arg(text: str) -> float:
    d = float(text)
    if not 0 < d <= 1:
        raise argparse.ArgumentTypeError("density must lie in (0, 1]")
    return d


def _sizes_arg(text: str) -> list[int]:
    return [_n_arg(t) for t in text.split(",") if t]


def _add_config_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("solver parameters")
    g.add_argument("--eta", type=float, default=1.0,
                   help="regularization gain, mu_k = eta*|V^T f|^sigma; >= 1 (default 1, not reported in the source experiments)")
    g.add_argument("--sigma", type=float, default=0.5,
                   help="regularization exponent in (0,1); theoretical order is 1 + sigma/2 (default 0.5)")
    g.add_argument("--theta", type=float, default=1e-2, help="projection tolerance bound theta (default 1e-2)")
    g.add_argument("--theta-schedule", choices=["half", "decreasing", "zero"], default="half",
                   help="theta_k rule: theta/2, theta/(k+2) or 0 (default half)")
    g.add_argument("--tol", type=float, default=1e-6, help="stop when ||f(x_k)|| < tol (default 1e-6)")
    g.add_argument("--max-iter", type=int, default=100, help="outer iteration cap (default 100)")
    g.add_argument("--max-inner", type=int, default=5000, help="BiCGSTAB iteration cap (default 5000)")
    g.add_argument("--max-proj", type=int, default=100, help="conditional-gradient iteration cap (default 100)")
    g.add_argument("--c-nu", type=float, default=1.0,
                   help="inner residual bound zeta_k = c*mu_k*min(1, c|f|^(sigma/2))*|f| (default c = 1)")
    g.add_argument("--forcing-cap", type=float, default=1e-6,
                   help="also require zeta_k <= cap*|V^T f| (default 1e-6)")
    g.add_argument("--warm-start", choices=["clipped", "iterate", "truncated"], default="clipped",
                   help="feasible start for conditional gradient (default clipped)")


def _config(args, **overrides) -> SolverConfig:
    try:
        return SolverConfig(
            eta=args.eta, sigma=args.sigma, theta=args.theta, theta_schedule=args.theta_schedule,
            outer_tol=args.tol, max_outer_iters=args.max_iter, max_inner_iters=args.max_inner,
            max_projection_iters=args.max_proj, c_nu=args.c_nu, forcing_cap=args.forcing_cap,
            warm_start=args.warm_start, **overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _add_instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", type=Path, help="instance file written by 'generate'")
    p.add_argument("--n", type=_n_arg, help="generate an instance of this size instead")
    p.add_argument("--density", type=_density_arg, default=0.05, help="sparsity of A (default 0.05)")
    p.add_argument("--seed", type=int, default=None, help="generation seed (default $NSLM_SEED or 0)")


def _instance(args):
    if args.instance is not None:
        return load_instance(args.instance)
    if args.n is None:
        raise UsageError("give --instance or --n")
    seed = default_seed() if args.seed is None else args.seed
    return generate_instance(args.n, args.density, seed)


def cmd_generate(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    inst = generate_instance(args.n, args.density, seed)
    save_instance(inst, args.out)
    s_min = smallest_singular_value(inst.A)
    print(f"wrote {args.out}: n={inst.n} nnz={inst.A.nnz} seed={seed} s_min={s_min:.6g} d={inst.d:.6g}")
    return EXIT_OK


def _iteration_table(report) -> str:
    lines = [f"{'k':>3} {'|f|':>10} {'mu':>10} {'zeta':>10} {'|r|':>10} {'|d|':>10} {'eps':>10} "
             f"{'inner':>6} {'proj':>5}"]
    for r in report.records:
        lines.append(f"{r.k:>3} {r.f_norm:>10.3e} {r.mu:>10.3e} {r.zeta:>10.3e} {r.r_norm:>10.3e} "
                     f"{r.d_norm:>10.3e} {r.eps:>10.3e} {r.inner_iters:>6} {r.projection_iters:>5}")
    lines.append(f"{len(report.records):>3} {report.final_residual:>10.3e}")
    return "\n".join(lines)


def cmd_solve(args) -> int:
    inst = _instance(args)
    config = _config(args, projection_mode=bench.METHODS[args.method])
    report = solve(inst.to_problem(), default_start(inst), config)
    payload = {"n": inst.n, "seed": inst.seed, "method": args.method, "config": vars(config),
               **report.to_dict()}
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    if args.json:
        print(text)
    elif not args.quiet:
        print(_iteration_table(report))
    if args.plot:
        from .plotting import plot_residual_history
        plot_residual_history({args.method: report.f_norms}, args.plot, tol=config.outer_tol,
                              title=f"n = {inst.n}")
    print(f"n={inst.n} method={args.method} it={report.iterations} time={report.time_s:.3f} "
          f"status={report.status.value}")
    return EXIT_OK if report.converged else EXIT_NONCONVERGED


def cmd_bench(args) -> int:
    seed_base = default_seed() if args.seed_base is None else args.seed_base
    config = _config(args)
    records = bench.run_bench(args.sizes, args.repeats, seed_base, args.density, config, args.jobs)
    rows = bench.comparison_rows(records)
    bench.write_runs_csv(records, args.out)
    if args.table:
        bench.write_table_csv(rows, args.table)
    print(bench.format_table(rows))
    if args.plot_dir:
        from .plotting import plot_bench_summary
        path = plot_bench_summary(bench.summary_rows(rows), Path(args.plot_dir) / "bench_summary.png")
        print(f"figure: {path}")
    failed = [r for r in records if not r.converged]
    if failed:
        print(f"{len(failed)} run(s) did not converge", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_order(args) -> int:
    inst = _instance(args)
    if inst.x_star is None:
        raise UsageError("order estimation needs an instance with a planted solution")
    config = _config(args)
    report = solve(inst.to_problem(), default_start(inst), config)
    target = 1 + config.sigma / 2
    print(f"theoretical order 1 + sigma/2 = {target:.2f}")
    try:
        fit = fit_convergence_order(report.errors, scale=float(np.linalg.norm(inst.x_star)))
    except InsufficientDecay as exc:
        print(f"InsufficientDecay: {exc}")
        return EXIT_NONCONVERGED
    print(f"fitted order = {fit.order:.3f} (iterations {report.iterations}, status {report.status.value})")
    if args.plot:
        from .plotting import plot_order_fit
        plot_order_fit(report.errors, fit, target, args.plot)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nslm", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random CAVE instance")
    p.add_argument("--n", type=_n_arg, required=True)
    p.add_argument("--density", type=_density_arg, default=0.05, help="sparsity of A (default 0.05)")
    p.add_argument("--seed", type=int, default=None, help="default $NSLM_SEED or 0")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="run ILMM-IP or ILMM-EP on one instance")
    _add_instance_args(p)
    p.add_argument("--method", choices=list(bench.METHODS), default="ilmm-ip")
    p.add_argument("--out", type=Path, help="write the JSON report here")
    p.add_argument("--json", action="store_true", help="print the JSON report to stdout")
    p.add_argument("--quiet", action="store_true", help="only print the summary line")
    p.add_argument("--plot", type=Path, help="save a residual-history figure")
    _add_config_args(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="compare ILMM-EP and ILMM-IP over sizes and seeds")
    p.add_argument("--sizes", type=_sizes_arg, default=[100, 500, 1000])
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed-base", type=int, default=None, help="default $NSLM_SEED or 0")
    p.add_argument("--density", type=_density_arg, default=0.05)
    p.add_argument("--out", type=Path, required=True, help="per-run CSV")
    p.add_argument("--table", type=Path, help="per-seed comparison CSV with median rows")
    p.add_argument("--plot-dir", type=Path, help="directory for summary figures")
    p.add_argument("--jobs", type=int, default=1, help="parallel instances (default 1)")
    _add_config_args(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("order", help="fit the empirical convergence order")
    _add_instance_args(p)
    p.add_argument("--plot", type=Path, help="save the log-log order figure")
    _add_config_args(p)
    p.set_defaults(func=cmd_order, tol=1e-12)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"nslm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InstanceFormatError as exc:
        print(f"nslm: parse error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (OSError, GenerationError) as exc:
        print(f"nslm: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
