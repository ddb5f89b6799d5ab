"""
Command-line entry point.

    python cli.py <mode> [--config PATH] [--preset NAME] [--seed N] [--out PATH]

The result table goes to --out, with its provenance in a YAML file beside
it, or to stdout when no path is given.
Diagnostics go to stderr.
"""

import argparse
import logging
import sys
from dataclasses import replace
from typing import List, Optional

from config import (
    MODES,
    SWEEP_MODES,
    TOOL_NAME,
    TOOL_VERSION,
    RunConfig,
    load_config,
    load_config_text,
)
from errors import ConfigParseError, ConfigurationError, ModelError
from presets import PRESETS
from sweep import ResultTable, provenance_path, run_simulation, run_sweep
from validate import run_validate

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog=TOOL_NAME,
        description="bioFET molecular-communication receiver model and sweeps",
    )
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", help="YAML run configuration")
    parser.add_argument(
        "--preset", help=f"named preset, one of: {', '.join(PRESETS.names())}"
    )
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", help="CSV output path (default: stdout)")
    parser.add_argument(
        "--workers", type=int, default=1, help="processes for sweep evaluation"
    )
    parser.add_argument(
        "--progress", action="store_true", help="show a progress bar while simulating"
    )
    parser.add_argument("--version", action="version", version=TOOL_VERSION)
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")
    return parser.parse_args(argv)


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """
    Load the configuration and apply the command-line overrides.
    """
    if args.config is not None:
        config = load_config(args.config, args.preset)
    else:
        config = load_config_text("", args.preset)

    if config.preset is not None:
        preset_mode = PRESETS.get(config.preset).mode
        if preset_mode != args.mode:
            logger.warning(
                "preset %s is a %s preset, running it in %s mode",
                config.preset,
                preset_mode,
                args.mode,
            )
    overrides = {"mode": args.mode}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["output"] = args.out
    return replace(config, **overrides)


def run(config: RunConfig, workers: int = 1, progress: bool = False) -> ResultTable:
    """
    Dispatch on the run mode.
    """
    if config.mode in SWEEP_MODES:
        return run_sweep(config, workers)
    match config.mode:
        case "simulate":
            return run_simulation(config, progress)
        case "validate":
            return run_validate(config)
        case _:
            raise ConfigurationError(f"Unknown mode: {config.mode}")


def write_table(table: ResultTable, path: Optional[str]) -> None:
    """
    CSV to path, provenance next to it. Without a path the table goes to
    stdout and the provenance to the log.
    """
    if path is None:
        table.write_csv(sys.stdout)
        for key, value in table.provenance.items():
            logger.info("%s: %s", key, value)
        return
    with open(path, "w", encoding="utf-8", newline="") as stream:
        table.write_csv(stream)
    sidecar = provenance_path(path)
    with open(sidecar, "w", encoding="utf-8") as stream:
        table.write_provenance(stream)
    logger.info("wrote %d rows to %s, provenance to %s", len(table.rows), path, sidecar)


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_arguments(argv)
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(stream=sys.stderr, level=level, format=LOG_FORMAT)

    try:
        config = resolve_config(args)
        table = run(config, args.workers, args.progress)
    except ConfigParseError as error:
        logger.error("configuration error: %s", error)
        return 2
    except (ConfigurationError, ModelError) as error:
        logger.error("%s", error)
        return 2

    try:
        write_table(table, config.output)
    except OSError as error:
        logger.error("cannot write %s: %s", config.output, error.strerror)
        return 2
    if not table.ok:
        logger.warning(
            "%d row errors, %d failed checks", len(table.errors), table.failures
        )
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
