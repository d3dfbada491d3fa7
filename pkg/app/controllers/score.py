import logging

import pandas as pd

from app.domain.backtest import PointInTimeView
from app.lib import constants
from app.lib.dependencies import Command, RunContext

from .backtest import schedule_for, tda_strategy
from .ingest import load_universe
from .norms import load_diffs

__all__ = ["command", "score"]

logger = logging.getLogger(__name__)


def score(context: RunContext) -> None:
    """Scores and target weights of every rebalance day, without a backtest."""
    config = context.config
    universe = load_universe(context)
    closes = universe.close_frame(config.data.max_fill_gap)
    diffs = {item.symbol: item for item in load_diffs(context, universe.symbols, pd.Timestamp(config.backtest.end))}
    strategy = tda_strategy(config)
    scores, weights = [], []
    with context.manifest.stage("score"):
        for day in schedule_for(config).dates:
            day_scores = strategy.score(PointInTimeView(closes, day, diffs))
            scores.append(day_scores)
            weights.append(strategy.allocation(day_scores, day).to_frame())
    context.store(constants.SCORES, pd.concat(scores, ignore_index=True)[constants.SCORE_COLUMNS])
    context.store(constants.WEIGHTS, pd.concat(weights, ignore_index=True))
    logger.info("scored %d rebalance days", len(scores))


command = Command("score", "Write RFM scores and target weights per rebalance day.", score)
