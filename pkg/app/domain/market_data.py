"""Daily close prices of the cryptocurrency universe.

Everything here works on pandas series indexed by a daily `DatetimeIndex`
named `date`. Series handed out by a `MarketUniverse` are never mutated.
"""
import hashlib
import logging
import math
import os
from collections import abc
from dataclasses import dataclass, field
from pathlib import Path

import httpx
import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view

from app.lib import constants
from app.lib.exceptions import DataError, FetchError, IngestError, InsufficientDataError, ParameterError

__all__ = [
    "ANNUALIZATION",
    "CsvSchema",
    "MarketUniverse",
    "PriceSeries",
    "ReturnSeries",
    "currencies_per_day",
    "fetch_dataset",
    "fill_gaps",
    "ingest_csv",
    "log_close",
    "log_returns",
    "longest_segment",
    "market_log_returns",
    "market_volatility",
    "rolling_sharpe",
    "rolling_volatility",
]

logger = logging.getLogger(__name__)

ANNUALIZATION = math.sqrt(365)
"""Crypto markets trade every calendar day."""

DATE_FORMAT = "%Y-%m-%d"


def _dated(values: abc.Sequence[float] | np.ndarray, dates: pd.DatetimeIndex, name: str) -> pd.Series:
    return pd.Series(np.asarray(values, dtype=float), index=pd.DatetimeIndex(dates, name="date"), name=name)


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Dated daily USD closes of one currency.

    Raises:
        DataError: If dates are not strictly increasing or a close is not
            finite and strictly positive.
    """

    symbol: str
    close: pd.Series

    def __post_init__(self) -> None:
        close = self.close.astype(float).rename("close")
        close.index = pd.DatetimeIndex(close.index, name="date")
        if not close.index.is_monotonic_increasing or close.index.has_duplicates:
            raise DataError(f"{self.symbol}: dates must be strictly increasing")
        values = close.to_numpy()
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise DataError(f"{self.symbol}: closes must be finite and positive")
        object.__setattr__(self, "close", close)

    @classmethod
    def from_values(
        cls, symbol: str, dates: abc.Iterable[str | pd.Timestamp], closes: abc.Iterable[float]
    ) -> "PriceSeries":
        return cls(symbol, _dated(list(closes), pd.DatetimeIndex(pd.to_datetime(list(dates))), "close"))

    def __len__(self) -> int:
        return len(self.close)

    @property
    def dates(self) -> pd.DatetimeIndex:
        return pd.DatetimeIndex(self.close.index)

    def truncate(self, as_of: pd.Timestamp) -> "PriceSeries":
        """Observations dated on or before `as_of`."""
        return PriceSeries(self.symbol, self.close.loc[: pd.Timestamp(as_of)])


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    symbol: str
    log_return: pd.Series

    def __len__(self) -> int:
        return len(self.log_return)


@dataclass(frozen=True)
class CsvSchema:
    """Names of the price file columns."""

    date: str = "date"
    symbol: str = "symbol"
    close: str = "close"


@dataclass(frozen=True, eq=False)
class MarketUniverse:
    """Every currency's price series, keyed by symbol.

    `rejections` holds the ingest rejection report (`row,reason`) of the file
    the universe was read from, empty otherwise.
    """

    series: abc.Mapping[str, PriceSeries]
    rejections: pd.DataFrame = field(default_factory=lambda: pd.DataFrame(columns=constants.REJECTION_COLUMNS))

    def __post_init__(self) -> None:
        for symbol, item in self.series.items():
            if symbol != item.symbol:
                raise DataError(f"series keyed as '{symbol}' holds '{item.symbol}'")
        object.__setattr__(self, "series", dict(sorted(self.series.items())))

    def __len__(self) -> int:
        return len(self.series)

    def __contains__(self, symbol: object) -> bool:
        return symbol in self.series

    def __getitem__(self, symbol: str) -> PriceSeries:
        return self.series[symbol]

    @property
    def symbols(self) -> list[str]:
        return list(self.series)

    @property
    def date_range(self) -> tuple[pd.Timestamp, pd.Timestamp] | None:
        """First and last day covered by any member series, `None` when empty."""
        populated = [s for s in self.series.values() if len(s)]
        if not populated:
            return None
        return min(s.dates[0] for s in populated), max(s.dates[-1] for s in populated)

    @property
    def observations(self) -> int:
        return sum(len(s) for s in self.series.values())

    def subset(self, n: int) -> "MarketUniverse":
        """The `n` currencies with the longest histories, ties broken by symbol."""
        ranked = sorted(self.series.values(), key=lambda s: (-len(s), s.symbol))[:n]
        return MarketUniverse({s.symbol: s for s in ranked}, self.rejections)

    def truncate(self, as_of: pd.Timestamp) -> "MarketUniverse":
        """Universe as it was known at the close of `as_of`."""
        truncated = {symbol: s.truncate(as_of) for symbol, s in self.series.items()}
        return MarketUniverse({symbol: s for symbol, s in truncated.items() if len(s)})

    def close_frame(self, fill_limit: int = 0) -> pd.DataFrame:
        """Wide frame of closes, one column per symbol, one row per calendar day.

        Args:
            fill_limit: Interior gaps of up to this many days are forward filled.
                Days before a currency's first or after its last observation
                stay missing.
        """
        if not self.series:
            return pd.DataFrame(index=pd.DatetimeIndex([], name="date"))
        frame = pd.concat({symbol: s.close for symbol, s in self.series.items()}, axis=1)
        first, last = self.date_range  # type:ignore[misc]
        frame = frame.reindex(pd.date_range(first, last, freq="D", name="date"))
        if fill_limit:
            frame = frame.ffill(limit=fill_limit, limit_area="inside")
        return frame

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, rejections: pd.DataFrame | None = None) -> "MarketUniverse":
        """Build from a long `symbol,date,close` frame such as the universe cache."""
        series = {
            str(symbol): PriceSeries(str(symbol), group.set_index("date")["close"].sort_index())
            for symbol, group in frame.groupby("symbol", sort=True)
        }
        if rejections is None:
            return cls(series)
        return cls(series, rejections)

    def to_frame(self) -> pd.DataFrame:
        """Long `symbol,date,close` frame, sorted by symbol then date."""
        parts = [
            pd.DataFrame({"symbol": s.symbol, "date": s.dates, "close": s.close.to_numpy()})
            for s in self.series.values()
        ]
        if not parts:
            return pd.DataFrame(columns=constants.UNIVERSE_COLUMNS)
        return pd.concat(parts, ignore_index=True)[constants.UNIVERSE_COLUMNS]


def ingest_csv(path: Path, schema: CsvSchema | None = None) -> MarketUniverse:
    """Load and validate the daily price file.

    Rows with an empty symbol, a close that is not a finite positive number,
    or a date already seen for their symbol are not loaded; they are listed in
    the universe's rejection report instead, so that every data row is either
    an observation or a rejection.

    Args:
        path: UTF-8 CSV with a header row.
        schema: Column names, defaults to `date,symbol,close`.

    Returns:
        The validated universe.

    Raises:
        IngestError: If the file cannot be read, a required column is missing
            or a date cannot be parsed. Row numbers count data rows from 1.
    """
    schema = schema or CsvSchema()
    if not path.is_file():
        raise IngestError(f"price file not found: {path}")
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except (OSError, UnicodeDecodeError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise IngestError(f"cannot read {path}: {e}") from e
    for column in (schema.date, schema.symbol, schema.close):
        if column not in raw.columns:
            raise IngestError(f"missing required column '{column}' in {path}")

    rows = pd.RangeIndex(1, len(raw) + 1)
    dates = pd.to_datetime(raw[schema.date].str.strip(), format=DATE_FORMAT, errors="coerce")
    if dates.isna().any():
        position = int(np.flatnonzero(dates.isna().to_numpy())[0])
        raise IngestError(f"unparseable date '{raw[schema.date].iloc[position]}'", row=position + 1)
    symbols = raw[schema.symbol].str.strip()
    closes = pd.to_numeric(raw[schema.close].str.strip(), errors="coerce")

    reasons = pd.Series("", index=raw.index, dtype=object)
    reasons[~np.isfinite(closes.to_numpy(dtype=float, na_value=np.nan))] = "unparseable close"
    reasons[(reasons == "") & (closes <= 0)] = "non-positive close"
    reasons[symbols == ""] = "empty symbol"
    valid = reasons == ""
    duplicated = pd.DataFrame({"symbol": symbols[valid], "date": dates[valid]}).duplicated(keep="first")
    reasons[duplicated[duplicated].index] = "duplicate date"

    accepted = reasons == ""
    rejections = pd.DataFrame({"row": rows[~accepted.to_numpy()], "reason": reasons[~accepted].to_numpy()})
    frame = pd.DataFrame({"symbol": symbols[accepted], "date": dates[accepted], "close": closes[accepted]})
    universe = MarketUniverse.from_frame(frame, rejections.reset_index(drop=True))
    logger.info(
        "ingested %d observations of %d currencies from %s, %d rows rejected",
        universe.observations,
        len(universe),
        path,
        len(rejections),
    )
    return universe


def fetch_dataset(url: str, cache_dir: Path, *, transport: httpx.BaseTransport | None = None) -> Path:
    """Download the price file once and serve it from the cache afterwards.

    The cached copy lives at `<cache_dir>/<sha256-of-url>.csv`, with the sha256
    of its content in a `.sha256` file next to it.

    Args:
        url: HTTP(S) location of the price file.
        cache_dir: Cache directory, created if missing.
        transport: Alternative `httpx` transport.

    Returns:
        Path of the local copy.

    Raises:
        FetchError: If the download fails and nothing is cached.
    """
    target = cache_dir / f"{hashlib.sha256(url.encode()).hexdigest()}.csv"
    if target.is_file():
        logger.info("using cached dataset %s", target)
        return target
    cache_dir.mkdir(parents=True, exist_ok=True)
    partial = target.with_suffix(".csv.part")
    digest = hashlib.sha256()
    try:
        with httpx.Client(transport=transport, follow_redirects=True) as client:
            with client.stream("GET", url) as response:
                response.raise_for_status()
                with partial.open("wb") as fh:
                    for chunk in response.iter_bytes():
                        digest.update(chunk)
                        fh.write(chunk)
    except httpx.HTTPError as e:
        partial.unlink(missing_ok=True)
        raise FetchError(f"cannot download {url}: {e}") from e
    os.replace(partial, target)
    target.with_suffix(".sha256").write_text(f"{digest.hexdigest()}\n", encoding="utf-8")
    logger.info("downloaded %s to %s (sha256 %s)", url, target, digest.hexdigest())
    return target


def log_close(series: PriceSeries) -> pd.Series:
    return np.log(series.close).rename("log_close")


def log_returns(series: PriceSeries) -> ReturnSeries:
    """Log return between consecutive observations, dated by the later one.

    Raises:
        InsufficientDataError: If fewer than 2 observations are given.
    """
    if len(series) < 2:
        raise InsufficientDataError(
            f"{series.symbol}: log returns need 2 observations", required=2, available=len(series)
        )
    values = np.diff(np.log(series.close.to_numpy()))
    return ReturnSeries(series.symbol, _dated(values, series.dates[1:], "log_return"))


def _windows(returns: ReturnSeries, window: int) -> tuple[np.ndarray, pd.DatetimeIndex]:
    if window < 2:
        raise ParameterError(f"rolling window must be at least 2, got {window}")
    values = returns.log_return.to_numpy(dtype=float)
    if len(values) < window:
        return np.empty((0, window)), pd.DatetimeIndex([], name="date")
    return sliding_window_view(values, window), pd.DatetimeIndex(returns.log_return.index[window - 1 :])


def rolling_volatility(returns: ReturnSeries, window: int = 30) -> pd.Series:
    """Annualized sample standard deviation over each full window, dated by
    the window's last day."""
    views, dates = _windows(returns, window)
    if not len(views):
        return _dated([], dates, "volatility")
    flat = np.ptp(views, axis=1) == 0
    std = np.where(flat, 0.0, views.std(axis=1, ddof=1))
    return _dated(std * ANNUALIZATION, dates, "volatility")


def rolling_sharpe(returns: ReturnSeries, window: int = 60) -> pd.Series:
    """Annualized mean over sample standard deviation of each full window,
    risk-free rate 0. Windows with zero dispersion are `NaN`."""
    views, dates = _windows(returns, window)
    if not len(views):
        return _dated([], dates, "sharpe")
    flat = np.ptp(views, axis=1) == 0
    std = np.where(flat, np.nan, views.std(axis=1, ddof=1))
    return _dated(views.mean(axis=1) / std * ANNUALIZATION, dates, "sharpe")


def fill_gaps(series: PriceSeries, max_gap: int = 3) -> list[PriceSeries]:
    """Make a series daily.

    Runs of up to `max_gap` missing days are filled with the last close,
    longer runs split the series.

    Returns:
        The contiguous daily segments, oldest first.
    """
    if not len(series):
        return []
    daily = series.close.asfreq("D")
    missing = daily.isna()
    run_id = (missing != missing.shift()).cumsum()
    run_length = missing.groupby(run_id).transform("size")
    long_gap = missing & (run_length > max_gap)
    filled = daily.ffill().where(~long_gap)
    segment_id = long_gap.cumsum()[~long_gap]
    return [
        PriceSeries(series.symbol, segment)
        for _, segment in filled[~long_gap].groupby(segment_id, sort=True)
    ]


def longest_segment(series: PriceSeries, max_gap: int = 3) -> PriceSeries:
    """Longest contiguous daily segment after [`fill_gaps`][app.domain.market_data.fill_gaps],
    the most recent one on ties."""
    segments = fill_gaps(series, max_gap)
    if not segments:
        return series
    longest = max(len(s) for s in segments)
    chosen = [s for s in segments if len(s) == longest][-1]
    if len(segments) > 1:
        logger.debug(
            "%s: %d segments after gap filling, keeping %s to %s",
            series.symbol,
            len(segments),
            chosen.dates[0].date(),
            chosen.dates[-1].date(),
        )
    return chosen


def currencies_per_day(universe: MarketUniverse) -> pd.Series:
    """Number of currencies with an observed close, per calendar day."""
    frame = universe.close_frame()
    return frame.notna().sum(axis=1).astype(int).rename("currencies")


def _cross_sectional_mean(columns: abc.Mapping[str, pd.Series], name: str) -> pd.Series:
    if not columns:
        return pd.Series(dtype=float, index=pd.DatetimeIndex([], name="date"), name=name)
    frame = pd.concat(columns, axis=1).sort_index()
    frame.index.name = "date"
    return frame.mean(axis=1, skipna=True).rename(name)


def market_log_returns(universe: MarketUniverse) -> pd.Series:
    """Mean log return across the currencies observed on each day."""
    return _cross_sectional_mean(
        {s.symbol: log_returns(s).log_return for s in universe.series.values() if len(s) >= 2},
        "mean_log_return",
    )


def market_volatility(universe: MarketUniverse, window: int = 30) -> pd.Series:
    """Mean rolling volatility across the currencies with a full window on each
    day. A currency enters from its first full window."""
    return _cross_sectional_mean(
        {
            s.symbol: rolling_volatility(log_returns(s), window)
            for s in universe.series.values()
            if len(s) > window
        },
        "mean_volatility",
    )
