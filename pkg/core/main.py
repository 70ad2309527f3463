# -*- coding: utf-8 -*-
"""
core.main

Command-line entry point. Run from the repository root:

    python -m core.main doe --config experiments/blood/config.yaml --jobs 4

Scalar flags override the matching config fields; everything else comes
from the config file. ``simulate`` runs without a config on the default
synthetic settings.
"""

import argparse
import sys
from typing import List, Optional

from core.cli import (
    COMMANDS,
    EXIT_CONFIG,
    CommandOptions,
    apply_overrides,
    config_from_mapping,
    execute,
    parse_config,
)
from core.exceptions import ConfigError
from core.logger import define_log_level, logger


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(prog="thermoscan", description="Breast-cancer diagnosis experiment toolkit.")
    parser.add_argument("command", choices=sorted(COMMANDS), help="Pipeline step to run.")
    parser.add_argument("--config", help="JSON or YAML run config.")
    parser.add_argument("--seed", type=int, help="Run a single seed instead of the configured list.")
    parser.add_argument("--jobs", type=int, default=0, help="Worker processes for DOE cells; 0 uses every core.")
    parser.add_argument("--resume", action="store_true", help="Continue HPO trial logs in the run directory.")
    parser.add_argument("--both-modes", action="store_true", help="Run paper_faithful and leak_free grids.")
    parser.add_argument("--out", help="Results root; the run lands in <out>/<run_id>.")
    parser.add_argument("--healthy", type=int, help="Synthetic healthy patients (simulate).")
    parser.add_argument("--tumor", type=int, help="Synthetic tumor patients (simulate).")
    parser.add_argument("--iters", type=int, help="HPO budget per family (optimize).")
    parser.add_argument("--model", help="Saved model file (evaluate).")
    parser.add_argument("--test-csv", help="Test CSV to score (evaluate).")
    parser.add_argument("--verbose", action="store_true", help="Log DEBUG to the console.")
    return parser.parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_args(argv)
    define_log_level("DEBUG" if args.verbose else "INFO", name=f"thermoscan_{args.command}")

    try:
        if args.config:
            config = parse_config(args.config)
        elif args.command == "simulate":
            config = config_from_mapping({"dataset": "synthetic"})
        else:
            raise ConfigError(f"'{args.command}' needs --config")
        config = apply_overrides(
            config,
            seed=args.seed,
            iters=args.iters,
            healthy=args.healthy,
            tumor=args.tumor,
            out=args.out,
        )
    except ConfigError as exc:
        logger.error(f"[CLI] invalid configuration: {exc}")
        return EXIT_CONFIG

    options = CommandOptions(
        jobs=args.jobs,
        resume=args.resume,
        both_modes=args.both_modes,
        model=args.model,
        test_csv=args.test_csv,
    )
    return execute(args.command, config, options)


if __name__ == "__main__":
    sys.exit(main())
