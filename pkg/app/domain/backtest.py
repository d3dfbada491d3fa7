"""Daily backtest of the TDA portfolio against the equal-weight benchmark.

Allocations are decided at the close of a rebalance day from data dated on
or before that day, and earn the next day's return. Between rebalances the
holdings drift with prices. A currency that stops trading is sold at its last
close and the proceeds sit in cash, which earns nothing.
"""
import logging
import math
from collections import abc
from dataclasses import dataclass
from typing import NamedTuple, Protocol

import numpy as np
import pandas as pd

from app.lib import constants
from app.lib.exceptions import DataError, LookAheadError, ParameterError
from app.lib.types import AllocationMode, FrequencyVariant, RebalanceFrequency, RecencyMode

from .landscape import DiffSeries
from .market_data import MarketUniverse
from .scoring import AllocationVector, allocate, composite_score, feature_matrix

__all__ = [
    "BacktestResult",
    "BacktestSummary",
    "MonthlyTable",
    "NaiveStrategy",
    "PointInTimeView",
    "RebalanceSchedule",
    "Strategy",
    "TdaStrategy",
    "build_schedule",
    "monthly_table",
    "naive_allocate",
    "run_backtest",
    "summarize",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RebalanceSchedule:
    dates: pd.DatetimeIndex
    frequency: RebalanceFrequency

    def __post_init__(self) -> None:
        dates = pd.DatetimeIndex(self.dates, name="date")
        if not dates.is_monotonic_increasing or dates.has_duplicates:
            raise ParameterError("rebalance dates must be strictly increasing")
        object.__setattr__(self, "dates", dates)

    def __len__(self) -> int:
        return len(self.dates)

    def __contains__(self, day: object) -> bool:
        return day in self.dates


def build_schedule(
    start: pd.Timestamp, end: pd.Timestamp, frequency: RebalanceFrequency = RebalanceFrequency.daily
) -> RebalanceSchedule:
    """Rebalance dates from `start` to `end`, both included.

    The first rebalance is always on `start`; weekly schedules repeat every
    7 days, monthly ones on the first day of each following month.
    """
    start, end = pd.Timestamp(start), pd.Timestamp(end)
    if start > end:
        raise ParameterError(f"schedule start {start.date()} is after end {end.date()}")
    match frequency:
        case RebalanceFrequency.daily:
            dates = pd.date_range(start, end, freq="D")
        case RebalanceFrequency.weekly:
            dates = pd.date_range(start, end, freq="7D")
        case RebalanceFrequency.monthly:
            dates = pd.DatetimeIndex([start]).union(pd.date_range(start, end, freq="MS"))
    return RebalanceSchedule(dates, frequency)


class PointInTimeView:
    """What a strategy may see at the close of `as_of`.

    Args:
        closes: Wide close frame, one column per symbol.
        as_of: Decision day.
        diffs: Norm difference series by symbol.

    Raises:
        LookAheadError: When data dated after `as_of` is requested.
    """

    def __init__(
        self, closes: pd.DataFrame, as_of: pd.Timestamp, diffs: abc.Mapping[str, DiffSeries] | None = None
    ) -> None:
        self.as_of = pd.Timestamp(as_of)
        self._closes = closes.loc[: self.as_of]
        self._diffs = diffs or {}

    @classmethod
    def from_universe(
        cls,
        universe: MarketUniverse,
        as_of: pd.Timestamp,
        diffs: abc.Iterable[DiffSeries] = (),
        fill_limit: int = 0,
    ) -> "PointInTimeView":
        return cls(universe.close_frame(fill_limit), as_of, {item.symbol: item for item in diffs})

    def _check(self, day: pd.Timestamp | None) -> pd.Timestamp:
        day = self.as_of if day is None else pd.Timestamp(day)
        if day > self.as_of:
            raise LookAheadError(f"data for {day.date()} requested at the close of {self.as_of.date()}")
        return day

    def closes(self, day: pd.Timestamp | None = None) -> pd.Series:
        """Closes on `day`, currencies without a price left out."""
        day = self._check(day)
        if day not in self._closes.index:
            return pd.Series(dtype=float)
        return self._closes.loc[day].dropna()

    def priced_symbols(self, day: pd.Timestamp | None = None) -> list[str]:
        return [str(symbol) for symbol in self.closes(day).index]

    def diff_series(self, until: pd.Timestamp | None = None) -> list[DiffSeries]:
        until = self._check(until)
        return [self._diffs[symbol].truncate(until) for symbol in sorted(self._diffs)]


class Strategy(Protocol):
    name: str

    def __call__(self, view: PointInTimeView) -> AllocationVector:
        ...


def naive_allocate(view: PointInTimeView) -> AllocationVector:
    """Weight `1/N` on each of the `N` currencies priced on the view's day,
    full cash when none is."""
    symbols = view.priced_symbols()
    if not symbols:
        logger.warning("no currency is priced on %s, holding cash", view.as_of.date())
        return AllocationVector.empty(AllocationMode.equal_weight, view.as_of)
    return allocate(pd.Series(0.0, index=symbols), AllocationMode.equal_weight, view.as_of)


class NaiveStrategy:
    name = constants.NAIVE_STRATEGY

    def __call__(self, view: PointInTimeView) -> AllocationVector:
        return naive_allocate(view)


@dataclass(frozen=True)
class TdaStrategy:
    """Weights from the composite RFM score of each currency's norm differences."""

    lookback: int = 30
    recency_mode: RecencyMode = RecencyMode.inverted
    frequency: FrequencyVariant = FrequencyVariant.count
    mode: AllocationMode = AllocationMode.paper_literal
    name: str = constants.TDA_STRATEGY

    def score(self, view: PointInTimeView) -> pd.DataFrame:
        """Scores CSV rows for the view's day."""
        matrix = feature_matrix(view.diff_series(), view.as_of, self.lookback, self.frequency)
        scores = composite_score(matrix, self.recency_mode)
        scores.insert(0, "date", view.as_of)
        return scores

    def allocation(self, scores: pd.DataFrame, as_of: pd.Timestamp) -> AllocationVector:
        """Weights from the rows returned by [`score`][app.domain.backtest.TdaStrategy.score]."""
        if scores.empty:
            logger.warning("no eligible currency on %s, holding cash", pd.Timestamp(as_of).date())
            return AllocationVector.empty(self.mode, as_of)
        return allocate(scores.set_index("symbol")["score"], self.mode, as_of)

    def __call__(self, view: PointInTimeView) -> AllocationVector:
        return self.allocation(self.score(view), view.as_of)


@dataclass(frozen=True, eq=False)
class BacktestResult:
    """Daily log returns of one strategy and the weights it rebalanced to.

    `daily` has columns `daily_log_return,cumulative_log_return,cash_weight`
    indexed by date; `weights` holds one weights CSV row per rebalanced holding.
    """

    strategy: str
    daily: pd.DataFrame
    weights: pd.DataFrame

    def to_frame(self) -> pd.DataFrame:
        frame = self.daily.reset_index()
        frame.insert(1, "strategy", self.strategy)
        return frame[constants.RETURN_COLUMNS]


def run_backtest(
    universe: MarketUniverse,
    strategy: Strategy,
    schedule: RebalanceSchedule,
    start: pd.Timestamp,
    end: pd.Timestamp,
    *,
    diffs: abc.Iterable[DiffSeries] = (),
    cost_bps: float = 0.0,
    fill_limit: int = 0,
) -> BacktestResult:
    """Simulate `strategy` from `start` to `end`, both included.

    Args:
        universe: Prices.
        strategy: Called at the close of each rebalance day.
        schedule: Rebalance days.
        start: First day, on which nothing is held yet.
        end: Last day.
        diffs: Norm differences handed to the strategy.
        cost_bps: Cost charged on turnover at each rebalance, in basis points.
        fill_limit: Interior price gaps of up to this many days are forward filled.

    Raises:
        DataError: If the range is not covered by the universe.
        LookAheadError: If the strategy asks for data after its decision day.
    """
    start, end = pd.Timestamp(start), pd.Timestamp(end)
    covered = universe.date_range
    if covered is None or start < covered[0] or end > covered[1] or start >= end:
        raise DataError(f"backtest range {start.date()} to {end.date()} is not covered by the universe")
    closes = universe.close_frame(fill_limit).loc[:end]
    symbols = [str(symbol) for symbol in closes.columns]
    prices = closes.to_numpy(dtype=float)
    by_symbol = {item.symbol: item for item in diffs}
    days = pd.date_range(start, end, freq="D", name="date")
    rows = closes.index.get_indexer(days)

    weights = np.zeros(len(symbols))
    daily: list[tuple[pd.Timestamp, float, float]] = []
    rebalances: list[pd.DataFrame] = []
    for k, (day, row) in enumerate(zip(days, rows)):
        log_return = 0.0
        if k:
            current = prices[row]
            held = weights > 0
            moves = np.zeros(len(symbols))
            priced = held & ~np.isnan(current)
            moves[priced] = current[priced] / prices[row - 1][priced] - 1.0
            simple = float(weights @ moves)
            log_return = math.log1p(simple)
            weights = weights * (1.0 + moves) / (1.0 + simple) if simple > -1.0 else np.zeros(len(symbols))
            delisted = held & np.isnan(current)
            if delisted.any():
                logger.info(
                    "%s: liquidating %s to cash", day.date(), ", ".join(np.asarray(symbols)[delisted].tolist())
                )
                weights[delisted] = 0.0

        if day in schedule:
            allocation = strategy(PointInTimeView(closes.iloc[: row + 1], day, by_symbol))
            target = allocation.weights.reindex(symbols).fillna(0.0).to_numpy()
            unpriced = (target > 0) & np.isnan(prices[row])
            unknown = set(allocation.weights.index[allocation.weights > 0]) - set(symbols)
            if unpriced.any() or unknown:
                logger.warning("%s: %s has no price, weight kept in cash", day.date(), strategy.name)
                target[unpriced] = 0.0
            turnover = float(np.abs(target - weights).sum())
            if cost_bps and turnover:
                log_return += math.log1p(-cost_bps / 1e4 * turnover)
            weights = target
            held = weights > 0
            rebalances.append(
                AllocationVector(
                    pd.Series(weights[held], index=np.asarray(symbols)[held]), allocation.mode, day
                ).to_frame()
            )

        cash = 1.0 - float(weights.sum())
        daily.append((day, log_return, 0.0 if abs(cash) < 1e-12 else cash))

    frame = pd.DataFrame(daily, columns=["date", "daily_log_return", "cash_weight"]).set_index("date")
    frame.insert(1, "cumulative_log_return", frame["daily_log_return"].cumsum())
    weight_rows = (
        pd.concat(rebalances, ignore_index=True) if rebalances else pd.DataFrame(columns=constants.WEIGHT_COLUMNS)
    )
    if (frame["cash_weight"] < 0).any():
        logger.warning(
            "%s: invested up to %.4f of capital on %d days, the excess borrowed at a zero rate",
            strategy.name,
            1.0 - frame["cash_weight"].min(),
            int((frame["cash_weight"] < 0).sum()),
        )
    logger.info(
        "%s: %d days, %d rebalances, cumulative log return %.6f",
        strategy.name,
        len(frame),
        len(rebalances),
        frame["cumulative_log_return"].iloc[-1],
    )
    return BacktestResult(strategy.name, frame, weight_rows)


@dataclass(frozen=True, eq=False)
class MonthlyTable:
    """Percent monthly log returns, columns `month,tda,naive`."""

    frame: pd.DataFrame

    def __len__(self) -> int:
        return len(self.frame)


def monthly_table(tda: BacktestResult, naive: BacktestResult) -> MonthlyTable:
    """100 times the sum of each month's daily log returns.

    Raises:
        DataError: If the two results do not cover the same days.
    """
    if not tda.daily.index.equals(naive.daily.index):
        raise DataError("strategies were backtested over different days")
    months = tda.daily.index.to_period("M")
    frame = pd.DataFrame(
        {
            "tda": tda.daily["daily_log_return"].groupby(months).sum() * 100,
            "naive": naive.daily["daily_log_return"].groupby(months).sum() * 100,
        }
    )
    frame.index = frame.index.astype(str)
    return MonthlyTable(frame.rename_axis("month").reset_index()[constants.MONTHLY_COLUMNS])


class BacktestSummary(NamedTuple):
    tda_cumulative: float
    naive_cumulative: float
    months_won: int
    months: int

    def lines(self) -> list[str]:
        return [
            f"TDA cumulative log return:   {self.tda_cumulative:.6f}",
            f"Naive cumulative log return: {self.naive_cumulative:.6f}",
            f"Months TDA >= naive:         {self.months_won} of {self.months}",
        ]


def summarize(tda: BacktestResult, naive: BacktestResult, table: MonthlyTable) -> BacktestSummary:
    """Cumulative log returns and the number of months the TDA portfolio did at
    least as well as the benchmark."""
    return BacktestSummary(
        float(tda.daily["cumulative_log_return"].iloc[-1]),
        float(naive.daily["cumulative_log_return"].iloc[-1]),
        int((table.frame["tda"] >= table.frame["naive"]).sum()),
        len(table),
    )
