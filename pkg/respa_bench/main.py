#!/usr/bin/env python3
"""
ResPA Benchmark - Command-Line Entry Point

Subcommands:
    train    train every configured model, write checkpoints + manifest
    attack   generate adversarial sets and per-sample traces
    eval     score adversarial sets on all targets (transfer tables, summary)
    sweep    re-run the transfer protocol over values of one hyperparameter
    surface  map loss surfaces around adversarial examples

Example:
    python main.py train config/example_run.json
    python main.py attack config/example_run.json --attack respa
    python main.py eval config/example_run.json
    python main.py sweep config/example_run.json --param gamma --values 0,0.2,0.6,0.9,1.0
    python main.py surface config/example_run.json --attack respa --samples 50

Exit codes: 0 success, 2 benchmark error (bad config, missing artifact,
refused overwrite...), 1 unexpected failure.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from app.application import BenchmarkApplication
from app.settings import load_application_settings, load_run_config
from core.utils.errors import BenchError
from core.utils.logger import setup_logger

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_BENCH_ERROR = 2


def parse_list_of_floats(text: str) -> List[float]:
    """'0,0.2,0.6' -> [0.0, 0.2, 0.6]"""
    try:
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from e


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="respa-bench",
        description="Residual perturbation attack benchmark: train, attack, evaluate, sweep, map surfaces")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", type=Path, help="run configuration (JSON)")
    common.add_argument("--force", action="store_true", help="overwrite differing output files")
    common.add_argument("--log-level", default=None, choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help="log level (default from settings)")
    common.add_argument("--workers", type=int, default=None, help="worker threads")
    common.add_argument("--settings", type=Path, default=None, help="application settings file")

    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument("--seeds", type=int, default=None,
                        help="use this many consecutive seeds starting at the config seed")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("train", parents=[common], help="train models")

    attack = sub.add_parser("attack", parents=[common, seeded], help="generate adversarial sets")
    attack.add_argument("--surrogate", default=None, help="surrogate model id (default: all)")
    attack.add_argument("--attack", default=None, help="attack name (default: all)")

    sub.add_parser("eval", parents=[common, seeded], help="compute transfer tables")

    sweep = sub.add_parser("sweep", parents=[common, seeded], help="hyperparameter sweep")
    sweep.add_argument("--param", required=True, help="beta, N, theta, gamma or rho")
    sweep.add_argument("--values", required=True, type=parse_list_of_floats,
                       help="comma-separated values")
    sweep.add_argument("--attack", default=None, help="attack name to sweep (default: respa)")

    surface = sub.add_parser("surface", parents=[common, seeded], help="loss-surface grids")
    surface.add_argument("--attack", default=None, help="attack name (default: all)")
    surface.add_argument("--samples", type=int, default=None, help="adversarial examples per attack")
    return parser


def run(args: argparse.Namespace) -> int:
    """Execute one parsed command"""
    settings = load_application_settings(args.settings)
    log_settings = settings.logging
    log_file = None
    if log_settings.file_output:
        log_file = Path(log_settings.log_directory) / "respa_bench.log"
    setup_logger(args.log_level or log_settings.level, log_file,
                 log_settings.max_file_size_mb, log_settings.backup_count, log_settings.console_output)
    logger = logging.getLogger(__name__)
    logger.info(f"{settings.name} {settings.version}: {args.command} {args.config}")

    config = load_run_config(args.config, settings)
    application = BenchmarkApplication(config, settings, force=args.force, max_workers=args.workers)
    seeds: Optional[List[int]] = None
    if getattr(args, "seeds", None):
        seeds = [config.seed + i for i in range(args.seeds)]

    if args.command == "train":
        application.cmd_train()
    elif args.command == "attack":
        application.cmd_attack(args.surrogate, args.attack, seeds)
    elif args.command == "eval":
        application.cmd_eval(seeds)
    elif args.command == "sweep":
        application.cmd_sweep(args.param, args.values, args.attack, seeds)
    elif args.command == "surface":
        application.cmd_surface(args.attack, args.samples, seeds)
    logger.info(f"{args.command} finished")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main function - Entry point for the application

    Returns:
        Process exit code
    """
    args = build_parser().parse_args(argv)
    logger = logging.getLogger(__name__)
    try:
        return run(args)
    except BenchError as e:
        logger.error(f"{e.__class__.__name__} [{e.error_type}]: {e}")
        logger.error(f"Debug info: {e.get_debug_info()}")
        return EXIT_BENCH_ERROR
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
