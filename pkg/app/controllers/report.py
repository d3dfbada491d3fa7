import logging

from app.domain import reports
from app.domain.backtest import MonthlyTable, summarize
from app.lib import constants
from app.lib.dependencies import Command, RunContext
from app.lib.repository import CsvRepository
from app.lib.service import Service

from .backtest import results_from_frame
from .ingest import load_universe
from .norms import load_diffs, load_norms

__all__ = ["command", "report"]

logger = logging.getLogger(__name__)


def report(context: RunContext) -> None:
    """Plot-ready CSVs of the market, the report currency and its norms, plus
    the summary of the last backtest when there is one."""
    config = context.config
    symbol = config.market.report_symbol
    universe = load_universe(context)
    diffs = load_diffs(context, universe.symbols)
    figures = Service(CsvRepository(context.output_dir / constants.REPORT_DIR))
    with context.manifest.stage("report"):
        figures.create("market", reports.market_overview(universe, diffs, config.market.volatility_window))
        if symbol in universe:
            figures.create(
                f"symbol_{symbol}",
                reports.symbol_overview(
                    universe, symbol, config.market.volatility_window, config.market.sharpe_window
                ),
            )
            symbol_norms = {item.symbol: item for item in load_norms(context, [symbol])}
            if symbol in symbol_norms:
                symbol_diffs = {item.symbol: item for item in diffs}.get(symbol)
                figures.create(f"norms_{symbol}", reports.norms_overview(universe, symbol_norms[symbol], symbol_diffs))
        else:
            logger.warning("report currency %s is not in the universe", symbol)
    for name in figures.list():
        context.manifest.record(f"{constants.REPORT_DIR}/{name}", figures.repository.checksum(name))

    if context.service.exists(constants.RETURNS) and context.service.exists(constants.MONTHLY):
        results = results_from_frame(context.service.get(constants.RETURNS))
        table = MonthlyTable(context.service.get(constants.MONTHLY))
        if constants.TDA_STRATEGY in results and constants.NAIVE_STRATEGY in results:
            summary = summarize(results[constants.TDA_STRATEGY], results[constants.NAIVE_STRATEGY], table)
            for line in summary.lines():
                print(line)


command = Command("report", "Write plot-ready CSVs and print the backtest summary.", report)
