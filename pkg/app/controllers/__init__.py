from app.lib.dependencies import Command

from . import backtest, ingest, norms, report, score

__all__ = ["commands"]

commands: list[Command] = [ingest.command, norms.command, score.command, backtest.command, report.command]
