"""Recency, frequency and monetary features of norm differences, scores and
portfolio weights."""
import logging
from collections import abc
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import pandas as pd

from app.lib import constants
from app.lib.exceptions import ParameterError
from app.lib.types import AllocationMode, FrequencyVariant, RecencyMode

from .landscape import DiffSeries

__all__ = [
    "AllocationVector",
    "FeatureMatrix",
    "RfmFeatures",
    "allocate",
    "composite_score",
    "feature_matrix",
    "normalize_minmax",
    "rfm_features",
]

logger = logging.getLogger(__name__)


class RfmFeatures(NamedTuple):
    symbol: str
    as_of: pd.Timestamp
    recency: int
    frequency: float
    monetary: float


@dataclass(frozen=True)
class FeatureMatrix:
    as_of: pd.Timestamp
    rows: tuple[RfmFeatures, ...] = ()

    def __len__(self) -> int:
        return len(self.rows)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=list(RfmFeatures._fields)).drop(columns="as_of")


@dataclass(frozen=True, eq=False)
class AllocationVector:
    """Weights by symbol. Whatever is not invested is held as cash."""

    weights: pd.Series
    mode: AllocationMode
    as_of: pd.Timestamp | None = None

    def __post_init__(self) -> None:
        weights = self.weights.astype(float).rename("weight")
        weights.index.name = "symbol"
        if (weights < 0).any():
            raise ParameterError("weights must be nonnegative")
        object.__setattr__(self, "weights", weights)

    @property
    def invested(self) -> float:
        return float(self.weights.sum())

    @property
    def cash(self) -> float:
        return 1.0 - self.invested

    @classmethod
    def empty(cls, mode: AllocationMode, as_of: pd.Timestamp | None = None) -> "AllocationVector":
        return cls(pd.Series(dtype=float, index=pd.Index([], dtype=object)), mode, as_of)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "date": self.as_of,
                "symbol": self.weights.index.astype(str),
                "weight": self.weights.to_numpy(),
                "mode": self.mode.value,
            },
            columns=constants.WEIGHT_COLUMNS,
        )


def rfm_features(
    diffs: DiffSeries,
    as_of: pd.Timestamp,
    lookback: int = 30,
    frequency: FrequencyVariant = FrequencyVariant.count,
) -> RfmFeatures | None:
    """Features over the `lookback` days ending on `as_of`.

    A currency is eligible when it has a norm difference on `as_of` and its
    history covers the whole lookback window.

    Returns:
        The features, or `None` for an ineligible currency.
    """
    if lookback < 1:
        raise ParameterError(f"lookback must be positive, got {lookback}")
    as_of = pd.Timestamp(as_of)
    known = diffs.diffs.loc[:as_of]
    if known.empty or known.index[-1] != as_of:
        return None
    start = as_of - pd.Timedelta(days=lookback - 1)
    if known.index[0] > start:
        return None
    window = known.loc[start:]
    positive = window[window > 0]
    recency = (as_of - positive.index[-1]).days if len(positive) else lookback + 1
    match frequency:
        case FrequencyVariant.count:
            freq = float(len(positive))
        case FrequencyVariant.magnitude:
            freq = float(window[window >= 0].abs().sum())
    return RfmFeatures(diffs.symbol, as_of, int(recency), freq, float(window.sum()))


def feature_matrix(
    diffs: abc.Iterable[DiffSeries],
    as_of: pd.Timestamp,
    lookback: int = 30,
    frequency: FrequencyVariant = FrequencyVariant.count,
) -> FeatureMatrix:
    """Features of every eligible currency, sorted by symbol."""
    rows = (rfm_features(item, as_of, lookback, frequency) for item in diffs)
    return FeatureMatrix(
        pd.Timestamp(as_of), tuple(sorted((row for row in rows if row is not None), key=lambda r: r.symbol))
    )


def normalize_minmax(values: abc.Sequence[float] | np.ndarray) -> np.ndarray:
    """`(x - min) / (max - min)`, all zeros when every value is the same.

    Raises:
        ParameterError: If `values` is empty.
    """
    array = np.asarray(values, dtype=float)
    if not len(array):
        raise ParameterError("cannot normalize an empty column")
    low, high = array.min(), array.max()
    if high == low:
        return np.zeros_like(array)
    return (array - low) / (high - low)


def composite_score(matrix: FeatureMatrix, recency_mode: RecencyMode = RecencyMode.inverted) -> pd.DataFrame:
    """Sum of the min-max normalized features of each currency.

    In inverted mode the recency component is `1 - r_z`, so the most recent
    positive difference scores highest. A column without spread contributes 0
    in both modes.

    Returns:
        Frame with columns `symbol,recency,frequency,monetary,r_z,f_z,m_z,score`,
        `r_z` being the recency component actually summed.
    """
    frame = matrix.to_frame()
    columns = ["symbol", "recency", "frequency", "monetary", "r_z", "f_z", "m_z", "score"]
    if frame.empty:
        return pd.DataFrame(columns=columns)
    r_z = normalize_minmax(frame["recency"])
    if recency_mode is RecencyMode.inverted and np.ptp(frame["recency"].to_numpy()) > 0:
        r_z = 1.0 - r_z
    frame["r_z"] = r_z
    frame["f_z"] = normalize_minmax(frame["frequency"])
    frame["m_z"] = normalize_minmax(frame["monetary"])
    frame["score"] = frame["r_z"] + frame["f_z"] + frame["m_z"]
    return frame[columns]


def allocate(
    scores: pd.Series | abc.Mapping[str, float],
    mode: AllocationMode = AllocationMode.paper_literal,
    as_of: pd.Timestamp | None = None,
) -> AllocationVector:
    """Portfolio weights from scores.

    `paper_literal` divides each score by the number of currencies with a
    nonnegative score. Scores run up to 3, so the weights may invest more
    than the capital; the excess is borrowed at a zero rate. `capped` is the
    same split scaled down to a total of 1 when it would exceed it.
    `normalized` divides by the total score. `equal_weight` ignores the scores.

    Raises:
        ParameterError: If `scores` is empty.
    """
    series = pd.Series(scores, dtype=float) if not isinstance(scores, pd.Series) else scores.astype(float)
    if series.empty:
        raise ParameterError("cannot allocate over an empty score list")
    eligible = series.clip(lower=0.0)
    match mode:
        case AllocationMode.paper_literal | AllocationMode.capped:
            weights = eligible / max(int((series >= 0).sum()), 1)
            if weights.sum() > 1.0:
                if mode is AllocationMode.capped:
                    weights = weights / weights.sum()
                else:
                    logger.debug("%s: literal weights invest %.4f of capital", as_of, weights.sum())
        case AllocationMode.normalized:
            total = eligible.sum()
            weights = eligible / total if total > 0 else eligible * 0.0
        case AllocationMode.equal_weight:
            weights = pd.Series(1.0 / len(series), index=series.index)
    return AllocationVector(weights, mode, as_of)
