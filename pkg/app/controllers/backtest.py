import logging

import pandas as pd

from app.domain.backtest import (
    BacktestResult,
    NaiveStrategy,
    RebalanceSchedule,
    TdaStrategy,
    build_schedule,
    monthly_table,
    run_backtest,
    summarize,
)
from app.lib import constants
from app.lib.config import PipelineConfig
from app.lib.dependencies import Command, RunContext

from .ingest import load_universe
from .norms import load_diffs

__all__ = ["backtest", "command", "results_from_frame", "schedule_for", "tda_strategy"]

logger = logging.getLogger(__name__)


def schedule_for(config: PipelineConfig) -> RebalanceSchedule:
    section = config.backtest
    return build_schedule(pd.Timestamp(section.start), pd.Timestamp(section.end), section.frequency)


def tda_strategy(config: PipelineConfig) -> TdaStrategy:
    return TdaStrategy(
        lookback=config.rfm.lookback,
        recency_mode=config.rfm.recency_mode,
        frequency=config.rfm.frequency,
        mode=config.allocation.mode,
    )


def results_from_frame(frame: pd.DataFrame) -> dict[str, BacktestResult]:
    """Rebuild backtest results from the returns artifact."""
    results = {}
    for strategy, group in frame.groupby("strategy", sort=True):
        daily = group.set_index("date")[["daily_log_return", "cumulative_log_return", "cash_weight"]]
        results[str(strategy)] = BacktestResult(str(strategy), daily, pd.DataFrame(columns=constants.WEIGHT_COLUMNS))
    return results


def backtest(context: RunContext) -> None:
    """Backtest the TDA portfolio and the 1/N benchmark."""
    config = context.config
    universe = load_universe(context)
    diffs = load_diffs(context, universe.symbols, pd.Timestamp(config.backtest.end))
    schedule = schedule_for(config)
    start, end = pd.Timestamp(config.backtest.start), pd.Timestamp(config.backtest.end)
    results = []
    for strategy in (tda_strategy(config), NaiveStrategy()):
        with context.manifest.stage(f"backtest_{strategy.name}"):
            results.append(
                run_backtest(
                    universe,
                    strategy,
                    schedule,
                    start,
                    end,
                    diffs=diffs,
                    cost_bps=config.backtest.cost_bps,
                    fill_limit=config.data.max_fill_gap,
                )
            )
    tda, naive = results
    table = monthly_table(tda, naive)
    context.store(constants.RETURNS, pd.concat([tda.to_frame(), naive.to_frame()], ignore_index=True))
    context.store(constants.MONTHLY, table.frame)
    context.store(constants.WEIGHTS, pd.concat([tda.weights, naive.weights], ignore_index=True))
    for line in summarize(tda, naive, table).lines():
        print(line)


command = Command("backtest", "Backtest the TDA portfolio against the 1/N benchmark.", backtest)
