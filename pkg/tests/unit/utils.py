from collections import abc
from pathlib import Path

import pandas as pd

from app.domain.market_data import PriceSeries


def make_series(symbol: str, closes: abc.Sequence[float], start: str = "2018-01-01") -> PriceSeries:
    """Daily series starting on `start`."""
    return PriceSeries.from_values(symbol, pd.date_range(start, periods=len(closes), freq="D"), closes)


def write_prices(path: Path, rows: abc.Iterable[tuple[str, str, object]]) -> Path:
    """Write a `date,symbol,close` file."""
    lines = ["date,symbol,close"] + [f"{d},{s},{c}" for d, s, c in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
