from collections import abc
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from app.domain.market_data import MarketUniverse
from app.lib import settings

from .utils import make_series, write_prices


@pytest.fixture(autouse=True)
def _patch_worker(monkeypatch: pytest.MonkeyPatch) -> abc.Iterator[None]:
    monkeypatch.setattr(settings.worker, "JOBS", 1)
    yield


@pytest.fixture()
def raw_prices(rng: np.random.Generator) -> dict[str, np.ndarray]:
    """

    Returns:
        Closes of a small synthetic market over 120 days from 2018-01-01: a
        steady trender, a noisy sideways currency, an oscillator and a
        currency with only 15 days of history.
    """
    days = 120
    t = np.arange(days)
    return {
        "TRND": 100 * np.exp(0.01 * t + 0.002 * rng.standard_normal(days)),
        "FLAT": 50 * np.exp(0.03 * rng.standard_normal(days)),
        "WAVE": 20 + 5 * np.sin(2 * np.pi * t / 9),
        "SHRT": 10 * np.exp(0.05 * rng.standard_normal(15)),
    }


@pytest.fixture()
def universe(raw_prices: dict[str, np.ndarray]) -> MarketUniverse:
    return MarketUniverse({symbol: make_series(symbol, closes) for symbol, closes in raw_prices.items()})


def _price_rows(raw: dict[str, np.ndarray]) -> list[tuple[str, str, object]]:
    return [
        (day.strftime("%Y-%m-%d"), symbol, repr(float(close)))
        for symbol, closes in raw.items()
        for day, close in zip(pd.date_range("2018-01-01", periods=len(closes), freq="D"), closes)
    ]


@pytest.fixture()
def prices_csv(tmp_path: Path, raw_prices: dict[str, np.ndarray]) -> Path:
    return write_prices(tmp_path / "prices.csv", _price_rows(raw_prices))


@pytest.fixture()
def momentum_csv(tmp_path: Path, rng: np.random.Generator) -> Path:
    """

    Returns:
        Price file of 120 days from 2018-01-01: TRND drifts upward while a
        four-day oscillation in its log price grows by 1.5% a day, so its
        delay embedding traces an ever wider loop. FLAT and NOIS are
        multiplicative noise.
    """
    t = np.arange(120)
    raw = {
        "TRND": 100 * np.exp(0.002 * t + 0.1 * 1.015**t * np.sin(np.pi * t / 2)),
        "FLAT": 50 * np.exp(0.01 * rng.standard_normal(len(t))),
        "NOIS": 30 * np.exp(0.01 * rng.standard_normal(len(t))),
    }
    return write_prices(tmp_path / "momentum.csv", _price_rows(raw))
