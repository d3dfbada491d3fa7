"""This is the top-level of the application and should only ever import from
other sub-packages of the application, and never be imported from. I.e., never
do `from app.main import whatever` from within any other module of any other
sub-package of the application.

The main point of this restriction is to support unit-testing. We need to ensure that we can load
any other component of the application for mocking things out in the unittests, without this module
being loaded before that mocking has been completed.

When writing tests, always use the `cli` fixture, never import `run` directly from this module.
"""
import argparse
import sys
from collections import abc
from datetime import date
from pathlib import Path
from typing import Any

from app.lib import logging, sentry, settings
from app.lib.config import PipelineConfig, config_from_snapshot, load_config
from app.lib.dependencies import RunContext, provide_context
from app.lib.exceptions import ExitCode, after_exception_hook_handler, exception_to_exit_code
from app.lib.manifest import RunManifest
from app.lib.repository import RepositoryException
from app.lib.types import AllocationMode, RecencyMode

from .controllers import commands

handlers = {command.name: command for command in commands}
PORTFOLIO_MODES = frozenset({AllocationMode.paper_literal, AllocationMode.normalized, AllocationMode.capped})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crypto-tda",
        description="Persistence-landscape RFM portfolio of cryptocurrencies, backtested against 1/N.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="command")
    for command in commands:
        sub = subparsers.add_parser(command.name, help=command.help, description=command.help)
        source = sub.add_mutually_exclusive_group()
        source.add_argument("--config", type=Path, help="key-value config file (TDA_SECTION__KEY=value)")
        source.add_argument(
            "--from-manifest", dest="manifest", type=Path, help="replay the configuration of a run manifest"
        )
        sub.add_argument("--jobs", type=int, help="worker processes, -1 for all cores")
        sub.add_argument("--subset", type=int, help="only the N currencies with the longest histories")
        sub.add_argument("--mode", choices=[mode.value for mode in AllocationMode if mode in PORTFOLIO_MODES])
        sub.add_argument("--recency", choices=[mode.value for mode in RecencyMode])
        sub.add_argument("--from", dest="start", type=date.fromisoformat, help="backtest start, YYYY-MM-DD")
        sub.add_argument("--to", dest="end", type=date.fromisoformat, help="backtest end, YYYY-MM-DD")
        sub.add_argument("--out", type=Path, help="output directory")
    return parser


def overrides(args: argparse.Namespace) -> dict[str, Any]:
    """Configuration sections set from command-line flags."""
    return {
        "data": {"subset": args.subset},
        "allocation": {"mode": args.mode},
        "rfm": {"recency_mode": args.recency},
        "backtest": {"start": args.start, "end": args.end},
        "output": {"directory": args.out},
    }


def configure(args: argparse.Namespace) -> PipelineConfig:
    """Pipeline configuration from a config file or a replayed manifest, with flags on top."""
    if args.manifest is not None:
        return config_from_snapshot(RunManifest.read_snapshot(args.manifest), **overrides(args))
    return load_config(args.config, **overrides(args))


def run(argv: abc.Sequence[str] | None = None) -> int:
    """Console entry point.

    Returns:
        Process exit code: 0 on success, 2 for configuration errors, 3 for
        data errors, 1 for anything else.
    """
    args = build_parser().parse_args(argv)
    logging.configure()
    sentry.configure()
    context_info = {"command": args.command, "argv": list(sys.argv[1:] if argv is None else argv)}
    context: RunContext | None = None
    try:
        context = provide_context(args.command, configure(args), args.jobs)
        handlers[args.command].handler(context)
        context.manifest.write(context.output_dir)
    except Exception as exc:  # pylint: disable=broad-except
        after_exception_hook_handler(exc, context_info)
        code = exception_to_exit_code(exc)
        if context is not None:
            context.manifest.exit_code = int(code)
            try:
                context.manifest.write(context.output_dir)
            except RepositoryException as write_exc:
                after_exception_hook_handler(write_exc, context_info)
        if settings.app.DEBUG and code is ExitCode.INTERNAL:
            raise
        return int(code)
    return int(ExitCode.OK)


if __name__ == "__main__":
    sys.exit(run())
