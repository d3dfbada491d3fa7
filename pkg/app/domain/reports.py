"""Plot-ready frames for the market and norm figures."""
from collections import abc

import pandas as pd

from app.lib.exceptions import DataError

from .landscape import DiffSeries, NormSeries, market_diff_series
from .market_data import (
    MarketUniverse,
    currencies_per_day,
    log_close,
    log_returns,
    market_log_returns,
    market_volatility,
    rolling_sharpe,
    rolling_volatility,
)

__all__ = ["market_overview", "norms_overview", "symbol_overview"]


def _join(columns: abc.Sequence[pd.Series]) -> pd.DataFrame:
    frame = pd.concat(columns, axis=1).sort_index()
    frame.index.name = "date"
    return frame.reset_index()


def _series(universe: MarketUniverse, symbol: str) -> MarketUniverse:
    if symbol not in universe:
        raise DataError(f"currency '{symbol}' is not in the universe")
    return universe


def symbol_overview(
    universe: MarketUniverse, symbol: str, volatility_window: int = 30, sharpe_window: int = 60
) -> pd.DataFrame:
    """`date,close,log_close,log_return,volatility,sharpe` of one currency."""
    series = _series(universe, symbol)[symbol]
    returns = log_returns(series)
    return _join(
        [
            series.close,
            log_close(series),
            returns.log_return,
            rolling_volatility(returns, volatility_window),
            rolling_sharpe(returns, sharpe_window),
        ]
    )


def market_overview(
    universe: MarketUniverse, diffs: abc.Iterable[DiffSeries] = (), volatility_window: int = 30
) -> pd.DataFrame:
    """`date,currencies,mean_log_return,mean_volatility,mean_diff_l2` across the universe."""
    return _join(
        [
            currencies_per_day(universe),
            market_log_returns(universe),
            market_volatility(universe, volatility_window),
            market_diff_series(diffs),
        ]
    )


def norms_overview(universe: MarketUniverse, norms: NormSeries, diffs: DiffSeries | None = None) -> pd.DataFrame:
    """`date,log_close,l2_norm,diff_l2` of one currency."""
    series = _series(universe, norms.symbol)[norms.symbol]
    columns = [log_close(series), norms.norms.rename("l2_norm")]
    diff_column = diffs.diffs if diffs is not None else pd.Series(dtype=float, index=pd.DatetimeIndex([]))
    columns.append(diff_column.rename("diff_l2"))
    return _join(columns)
