"""Command-line front end.

Subcommands:

* ``run <config>`` executes the configured experiment, writes the CSV, and
  prints an aligned summary table.
* ``verify [--scope NAME]`` runs the self-check suites and reports per-suite
  pass/fail counts; exit status 0 only when everything passes.
* ``table <csv> [...]`` merges result CSVs and prints the pivot table.
* ``backends [...]`` times the baseline inner loop on every available
  kernel backend.

Exit codes: 0 success, 1 internal failure, 2 configuration/usage error,
3 budget too small.  The ``SISGF_OUTPUT_DIR`` environment variable
redirects where result CSVs are written.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from typing import Optional, Sequence

from .errors import BudgetTooSmall, ConfigError, SisgfError

OUTPUT_DIR_ENV = "SISGF_OUTPUT_DIR"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sisgf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment from a config file")
    p_run.add_argument("config", help="path to the run configuration")
    p_run.add_argument("--jobs", type=int, default=None, help="worker processes for replications")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")

    p_verify = sub.add_parser("verify", help="run the property self-check suites")
    p_verify.add_argument("--scope", default=None, help="run a single suite (projection, smoothing, oracle)")
    p_verify.add_argument("--full", action="store_true", help="full-size suites instead of the quick pass")
    p_verify.add_argument("--inject-fault", default=None, help=argparse.SUPPRESS)  # test hook

    p_table = sub.add_parser("table", help="merge result CSVs into one pivot table")
    p_table.add_argument("csvs", nargs="+", metavar="csv", help="result files to merge")

    p_bench = sub.add_parser("backends", help="time the kernel backends against each other")
    p_bench.add_argument("--dim", type=int, default=256)
    p_bench.add_argument("--iterations", type=int, default=50_000)
    return parser


def _cmd_run(args) -> int:
    from . import config as config_mod
    from . import experiment

    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as err:
        print(f"error: cannot read config: {err}", file=sys.stderr)
        return 2
    cfg = config_mod.parse_config(text)
    if cfg.problem_kind == "external":
        print("error: external problems are driven through the library API, not the CLI runner", file=sys.stderr)
        return 2
    seed = cfg.seed if args.seed is None else args.seed
    jobs = cfg.jobs if args.jobs is None else args.jobs

    budgets = cfg.budgets if cfg.budgets else (0,)
    t0 = time.perf_counter()
    result = experiment.run_experiment(
        template=cfg.problem,
        dims=cfg.dims,
        budgets=budgets,
        algorithms=cfg.algorithms,
        replications=cfg.replications,
        seed=seed,
        jobs=jobs,
    )
    rows = result.to_csv_rows()
    out_path = cfg.output or "results.csv"
    out_dir = os.environ.get(OUTPUT_DIR_ENV)
    if out_dir:
        out_path = os.path.join(out_dir, os.path.basename(out_path))
    experiment.write_csv(rows, out_path)
    print(experiment.render_table(rows))
    print(f"\nwrote {out_path} ({len(rows)} rows) in {time.perf_counter() - t0:.1f}s")
    return 0


def _cmd_verify(args) -> int:
    from . import checks

    sparsify_fn = None
    if args.inject_fault == "projection-threshold":
        # deliberately broken projection used to confirm suite sensitivity
        from . import projection as proj

        def sparsify_fn(inp):
            loose = proj.ProjectionInput(
                x=inp.x,
                threshold_U=inp.threshold_U / 2,
                radius_R=inp.radius_R,
                gamma=inp.gamma,
                a=inp.a,
            )
            v, cert = proj.sparsify_project(loose)
            cert.max_kkt_residual = proj.verify_kkt(inp, v, cert)
            return v, cert
    elif args.inject_fault:
        print(f"error: unknown fault {args.inject_fault!r}", file=sys.stderr)
        return 2

    try:
        reports = checks.run_suites(scope=args.scope, quick=not args.full, sparsify_fn=sparsify_fn)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    all_ok = True
    for report in reports:
        status = "PASS" if report.ok else "FAIL"
        print(f"{report.name:<12} {status}  ({report.passed} passed, {report.failed} failed)")
        for failure in report.failures:
            print(f"    - {failure}")
        all_ok = all_ok and report.ok
    return 0 if all_ok else 1


def _cmd_table(args) -> int:
    from . import experiment

    rows = []
    for path in args.csvs:
        rows.extend(experiment.read_csv(path))
    if not rows:
        print("error: no data rows in the given CSVs", file=sys.stderr)
        return 2
    print(experiment.render_table(rows))
    return 0


def _cmd_backends(args) -> int:
    from . import backends, baselines
    from .oracle import OracleSession
    from .quadratic import QuadraticProblemConfig, generate_problem

    problem = generate_problem(
        QuadraticProblemConfig(dim=args.dim, seed=7), calibration_samples=4000
    )
    params = baselines.sgf_default_params(problem.spec, 2 * args.iterations)
    names = ["python"] + (["compiled"] if backends.HAVE_COMPILED else [])
    print(f"baseline inner loop: dim={args.dim}, iterations={args.iterations}")
    timings = {}
    results = {}
    for name in names:
        session = OracleSession(problem, rng_root=42, domain_slack=None)
        t0 = time.perf_counter()
        x_rand, x_avg, trace = baselines.sgf_run(session, params, backend=name)
        timings[name] = time.perf_counter() - t0
        results[name] = x_avg
        rate = args.iterations / timings[name]
        print(f"  {name:<9} {timings[name]:8.3f}s  ({rate:,.0f} it/s)")
    if len(names) == 2:
        import numpy as np

        diff = float(np.max(np.abs(results["python"] - results["compiled"])))
        print(f"  speedup compiled/python: {timings['python'] / timings['compiled']:.1f}x")
        print(f"  max |avg difference| between backends: {diff:.3e}")
    if not backends.HAVE_COMPILED:
        print("  compiled extension not built; see README for build instructions")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "verify": _cmd_verify,
        "table": _cmd_table,
        "backends": _cmd_backends,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as err:
        field = f" [{err.field}]" if err.field else ""
        print(f"config error{field}: {err}", file=sys.stderr)
        return 2
    except BudgetTooSmall as err:
        print(f"budget error: {err}", file=sys.stderr)
        return 3
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 1
    except SisgfError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
