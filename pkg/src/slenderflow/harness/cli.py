"""Command-line interface.

Exit codes: 0 on success, 2 for configuration errors (bad YAML, schema
violations, unusable inputs), 3 for solver failures (instability, geometry
breakdown, no convergence).  Runs execute one experiment per process and
write their artifacts single-threaded; ``--threads`` only widens the lattice
kernel's compute pool, which does not change results (the kernel is bitwise
thread-independent).
"""

from __future__ import annotations

import argparse
import sys

from ..errors import ConfigError, SlenderflowError
from .config import CompareSpec, ExperimentConfig, load_config
from .experiments import run_experiment
from .report import read_summary

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slenderflow",
        description="Sedimenting-fiber experiments: a lattice Boltzmann "
                    "solver cross-validated against a slender-body "
                    "boundary-integral solver.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment from a YAML config")
    run.add_argument("config", help="path to the experiment YAML")
    run.add_argument("--output", metavar="DIR", default=None,
                     help="output directory (default: the config's 'output',"
                          " else runs/<kind>)")
    run.add_argument("--threads", type=int, default=None, metavar="N",
                     help="lattice kernel threads (results are identical for"
                          " any N)")
    run.add_argument("--vtk-every", type=int, default=0, metavar="K",
                     help="write a lattice snapshot every K steps (0 = off)")
    run.add_argument("--dry-run", action="store_true",
                     help="validate the config and print the plan without"
                          " running")

    rep = sub.add_parser("report",
                         help="print the stored summary of a run directory")
    rep.add_argument("directory")

    cmp = sub.add_parser("compare",
                         help="compare two completed tumbling runs")
    cmp.add_argument("dir_a")
    cmp.add_argument("dir_b")
    cmp.add_argument("--output", metavar="DIR", default=None,
                     help="optionally persist the comparison artifacts")
    return parser


def _cmd_run(args) -> int:
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError(f"--threads must be >= 1, got {args.threads}")
        from ..lbm.kernels import set_threads
        set_threads(args.threads)
    config = load_config(args.config)
    if args.dry_run:
        report = run_experiment(config, dry_run=True)
        print(report.notes["plan"])
        return EXIT_OK
    output = args.output or config.output or f"runs/{config.kind}"
    report = run_experiment(config, output=output,
                            vtk_every=args.vtk_every)
    for key, value in report.summary_entries().items():
        print(f"{key} = {value}")
    print(f"# artifacts in {output}")
    return EXIT_OK


def _cmd_report(args) -> int:
    entries = read_summary(f"{args.directory}/summary.txt")
    for key, value in entries.items():
        print(f"{key} = {value}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    config = ExperimentConfig(
        kind="cross-compare",
        compare=CompareSpec(run_a=args.dir_a, run_b=args.dir_b),
    )
    report = run_experiment(config, output=args.output)
    for key, value in report.summary_entries().items():
        print(f"{key} = {value}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage errors; map the latter
        # onto the config-error code it already matches
        code = exc.code if isinstance(exc.code, int) else EXIT_CONFIG
        return EXIT_OK if code == 0 else EXIT_CONFIG
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "report":
            return _cmd_report(args)
        return _cmd_compare(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SlenderflowError as exc:
        print(f"solver error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
