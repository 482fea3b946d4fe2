"""Command-line interface.

Subcommands:
  run            execute one configured scenario
  sweep-m        measurement-number comparison grid (3 matrix modes x Ms)
  sweep-photons  photon-budget comparison grid (plus/differential, TV solver)
  init-config    write a default scenario configuration

Exit codes: 0 success, 2 invalid configuration or parameters,
3 solver non-convergence, 4 degenerate metric or measurement.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .errors import (ConfigError, DegenerateMeasurementError, DegeneratePartitionError,
                     ParameterError, SolverDivergenceError, UndefinedCnrError)
from .pipeline import ExperimentConfig, load_config, run, save_config, sweep_measurements, sweep_photons

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3
EXIT_DEGENERATE = 4


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ccgi",
        description="Simulate and reconstruct complementary compressive ghost images.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one configured scenario")
    p_run.add_argument("--config", required=True, help="scenario JSON file")
    p_run.add_argument("--out", default=None, help="output directory (overrides config)")
    p_run.add_argument("--seed", type=int, default=None,
                       help="replace the config's trial seeds with this single seed")
    p_run.add_argument("--figures", action=argparse.BooleanOptionalAction, default=True,
                       help="render PNG figures next to the CSV output")

    p_sm = sub.add_parser("sweep-m", help="sweep measurement numbers over all matrix modes")
    p_sm.add_argument("--config", required=True)
    p_sm.add_argument("--ms", required=True, type=_int_list,
                      help="comma-separated measurement counts, e.g. 400,600,800,1000")
    p_sm.add_argument("--out", default=None)
    p_sm.add_argument("--figures", action=argparse.BooleanOptionalAction, default=True)

    p_sp = sub.add_parser("sweep-photons", help="sweep integration intervals (photon budgets)")
    p_sp.add_argument("--config", required=True)
    p_sp.add_argument("--intervals", required=True, type=_float_list,
                      help="comma-separated integration intervals in seconds, e.g. 2,4,6,8")
    p_sp.add_argument("--out", default=None)
    p_sp.add_argument("--figures", action=argparse.BooleanOptionalAction, default=True)

    p_init = sub.add_parser("init-config", help="write a default scenario configuration")
    p_init.add_argument("--out", default="config.json")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "init-config":
            save_config(ExperimentConfig(), args.out)
            print(f"wrote {args.out}")
            return EXIT_OK

        config = load_config(args.config)
        if args.command == "run":
            if args.seed is not None:
                config = dataclasses.replace(config, trial_seeds=(args.seed,))
            result = run(config, out_dir=args.out, figures=args.figures)
            print(f"wrote {len(result.files)} files to {result.out_dir}")
        elif args.command == "sweep-m":
            results = sweep_measurements(config, args.ms, out_dir=args.out,
                                         figures=args.figures)
            out = args.out or config.output_dir
            print(f"completed {len(results)} runs under {out}")
        else:
            results = sweep_photons(config, args.intervals, out_dir=args.out,
                                    figures=args.figures)
            out = args.out or config.output_dir
            print(f"completed {len(results)} runs under {out}")
        return EXIT_OK
    except (ConfigError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverDivergenceError as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (DegeneratePartitionError, UndefinedCnrError, DegenerateMeasurementError) as exc:
        print(f"degenerate result: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
