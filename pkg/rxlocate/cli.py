#!/usr/bin/env python3
"""Command-line interface for the rxlocate fault-location experiment.

Usage:
    rxlocate run-all --config configs/default.yaml
    rxlocate simulate --preset quick --seed 7 --out runs/quick
    rxlocate train --config configs/default.yaml --out runs/reference -v
"""
from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from typing import Any, Optional

from .config import ExperimentConfig, load_config
from .errors import RxLocateError
from .formatter import OutputFormatter
from .pipeline import evaluate, featurize, run_experiment, simulate, train, with_overrides

LOG_FORMAT = "%(asctime)s %(levelname)-8s %(name)s %(message)s"

PRESETS: dict[str, Callable[[int], ExperimentConfig]] = {
    "reference": ExperimentConfig.reference,
    "quick": ExperimentConfig.quick,
}


def _print_paths(paths: Sequence[Any]) -> None:
    for path in paths:
        print(path)


def _cmd_simulate(cfg: ExperimentConfig) -> None:
    paths = simulate(cfg)
    print(f"wrote {len(paths)} images under {cfg.output_dir}")


def _cmd_featurize(cfg: ExperimentConfig) -> None:
    _print_paths(featurize(cfg))


def _cmd_train(cfg: ExperimentConfig) -> None:
    for section, cv in train(cfg).items():
        best = min(cv.rmse.items(), key=lambda vr: vr[1])
        print(f"{section.value}: best {best[0].value} (CV RMSE {best[1]:.6g})")


def _cmd_evaluate(cfg: ExperimentConfig) -> None:
    result = evaluate(cfg)
    sys.stdout.write(OutputFormatter.format_comparison(result.reports))


def _cmd_run_all(cfg: ExperimentConfig) -> None:
    result = run_experiment(cfg)
    sys.stdout.write(OutputFormatter.format_comparison(result.reports))
    for report in result.reports:
        print(f"{report.section.value}: maximum test error {report.max_percent_error:.6g} %")


COMMANDS: dict[str, tuple[Callable[[ExperimentConfig], None], str]] = {
    "simulate": (_cmd_simulate, "simulate every scenario and write the R-X images"),
    "featurize": (_cmd_featurize, "extract texture features from the images"),
    "train": (_cmd_train, "cross-validate all models and refit the best per section"),
    "evaluate": (_cmd_evaluate, "estimate the test faults and write the reports"),
    "run-all": (_cmd_run_all, "run every stage in order"),
}


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per pipeline stage."""
    parser = argparse.ArgumentParser(
        prog="rxlocate",
        description="Fault location on mixed overhead/cable lines from R-X "
        "trajectory images and regression models",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Full experiment from a configuration file
  %(prog)s run-all --config configs/default.yaml

  # Quick smoke run with a fixed seed
  %(prog)s run-all --preset quick --seed 7 --out runs/quick

  # Re-run training only, with debug logging
  %(prog)s train --config configs/default.yaml -v
        """,
    )
    common = argparse.ArgumentParser(add_help=False)
    source = common.add_mutually_exclusive_group()
    source.add_argument("-c", "--config", help="YAML experiment configuration")
    source.add_argument(
        "--preset",
        choices=sorted(PRESETS),
        help="built-in configuration used when no file is given",
    )
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--out", help="override the configured output directory")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def resolve_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> ExperimentConfig:
    """Configuration from ``--config`` or ``--preset``, with flag overrides."""
    if args.config:
        cfg = load_config(args.config)
    else:
        if args.seed is None:
            parser.error("--seed is required without --config")
        cfg = PRESETS[args.preset or "reference"](args.seed)
    return with_overrides(cfg, seed=args.seed, output_dir=args.out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format=LOG_FORMAT,
    )

    try:
        cfg = resolve_config(args, parser)
        COMMANDS[args.command][0](cfg)
    except RxLocateError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"Error: File '{e.filename}' not found", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
