import logging
from collections import abc

import pandas as pd

from app.domain.embedding import EmbeddingParams
from app.domain.landscape import DiffSeries, NormSeries
from app.lib import constants
from app.lib.config import PipelineConfig
from app.lib.dependencies import Command, RunContext
from app.lib.repository import BeforeAfter, CollectionFilter, FilterTypes
from app.worker import currency_norms

from .ingest import load_universe

__all__ = ["command", "embedding_params", "load_diffs", "load_norms", "norms"]

logger = logging.getLogger(__name__)


def embedding_params(config: PipelineConfig) -> EmbeddingParams:
    return EmbeddingParams(config.embedding.d, config.embedding.w, config.embedding.transform)


def _long(symbol: str, series: pd.Series, column: str) -> pd.DataFrame:
    return pd.DataFrame({"symbol": symbol, "date": series.index, column: series.to_numpy()})


def _concat(parts: list[pd.DataFrame], columns: list[str]) -> pd.DataFrame:
    return pd.concat(parts, ignore_index=True)[columns] if parts else pd.DataFrame(columns=columns)


def _filters(symbols: abc.Collection[str] | None, until: pd.Timestamp | None) -> list[FilterTypes]:
    filters: list[FilterTypes] = []
    if symbols is not None:
        filters.append(CollectionFilter("symbol", symbols))
    if until is not None:
        filters.append(BeforeAfter("date", before=until + pd.Timedelta(days=1), after=None))
    return filters


def load_norms(context: RunContext, symbols: abc.Collection[str] | None = None) -> list[NormSeries]:
    """Cached norm series, restricted to `symbols` when given."""
    frame = context.service.get(constants.NORMS, *_filters(symbols, None))
    return [
        NormSeries(str(symbol), group.set_index("date")["l2_norm"])
        for symbol, group in frame.groupby("symbol", sort=True)
    ]


def load_diffs(
    context: RunContext, symbols: abc.Collection[str] | None = None, until: pd.Timestamp | None = None
) -> list[DiffSeries]:
    """Cached difference series of `symbols`, up to and including `until`.

    Rows after `until` are dropped on load, so no stage reads a difference
    dated after its last rebalance day.
    """
    frame = context.service.get(constants.DIFFS, *_filters(symbols, until))
    return [
        DiffSeries(str(symbol), group.set_index("date")["diff_l2"])
        for symbol, group in frame.groupby("symbol", sort=True)
    ]


def norms(context: RunContext) -> None:
    """Landscape norm and difference series of every currency."""
    config = context.config
    universe = load_universe(context)
    params = embedding_params(config)
    tasks = [
        (
            series,
            params,
            config.persistence.effective_threshold,
            config.landscape.p,
            config.landscape.include_h0,
            config.data.max_fill_gap,
            config.persistence.dump_diagrams,
        )
        for series in universe.series.values()
    ]
    with context.manifest.stage("norms"):
        results = context.pool.map(currency_norms, tasks)

    norm_parts, diff_parts, skipped, diagrams = [], [], [], []
    for result in results:
        if result.skipped is not None:
            skipped.append({"symbol": result.symbol, "observations": result.skipped[0], "required": result.skipped[1]})
            continue
        assert result.norms is not None and result.diffs is not None
        norm_parts.append(_long(result.symbol, result.norms.norms, "l2_norm"))
        if len(result.diffs):
            diff_parts.append(_long(result.symbol, result.diffs.diffs, "diff_l2"))
        diagrams.extend(result.diagrams)

    context.store(constants.NORMS, _concat(norm_parts, constants.NORM_COLUMNS))
    context.store(constants.DIFFS, _concat(diff_parts, constants.DIFF_COLUMNS))
    context.store(constants.SKIPPED, pd.DataFrame(skipped, columns=constants.SKIP_COLUMNS))
    if config.persistence.dump_diagrams:
        context.store(constants.DIAGRAMS, pd.DataFrame(diagrams, columns=constants.DIAGRAM_COLUMNS))
    elif context.service.exists(constants.DIAGRAMS):
        logger.info("removing diagrams of a previous run")
        context.service.delete(constants.DIAGRAMS)
    logger.info("norms for %d currencies, %d skipped", len(norm_parts), len(skipped))
    print(f"{len(norm_parts)} currencies with norms, {len(skipped)} skipped as too short")


command = Command("norms", "Compute landscape norm and difference series.", norms)
