"""Sliding-window point clouds from time-delay embeddings of a price series."""
from collections import abc
from dataclasses import dataclass

import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view

from app.lib.exceptions import InsufficientDataError, ParameterError
from app.lib.types import Transform

from .market_data import PriceSeries

__all__ = [
    "EmbeddingParams",
    "PointCloud",
    "delay_vectors",
    "required_observations",
    "transform_values",
    "window_clouds",
]


@dataclass(frozen=True)
class EmbeddingParams:
    """Delay dimension `d`, window size `w` in points and the scalar transform.

    Raises:
        ParameterError: Unless `d >= 2`, `w >= d + 1` and `d <= w / 2`.
    """

    d: int = 4
    w: int = 30
    transform: Transform = Transform.log_price

    def __post_init__(self) -> None:
        if self.d < 2 or self.w < self.d + 1 or 2 * self.d > self.w:
            raise ParameterError(f"embedding requires d >= 2, w >= d + 1 and d <= w/2, got d={self.d}, w={self.w}")


@dataclass(frozen=True, eq=False)
class PointCloud:
    """`w` delay vectors of dimension `d`, dated by the most recent sample they contain.

    Raises:
        ParameterError: If the points are not finite, or `params` is given and
            the cloud is not `w` points of dimension `d`.
    """

    points: np.ndarray
    window_end_date: pd.Timestamp
    params: EmbeddingParams | None = None

    def __post_init__(self) -> None:
        if self.points.ndim != 2 or not np.all(np.isfinite(self.points)):
            raise ParameterError("point cloud must be a finite 2-d array")
        if self.params is not None and self.points.shape != (self.params.w, self.params.d):
            raise ParameterError(
                f"window of w={self.params.w}, d={self.params.d} needs {self.params.w} points of dimension "
                f"{self.params.d}, got shape {self.points.shape}"
            )

    def __len__(self) -> int:
        return len(self.points)


def delay_vectors(values: abc.Sequence[float] | np.ndarray, d: int) -> np.ndarray:
    """Delay coordinate vectors `(x_i, ..., x_{i+d-1})`, one row each.

    Args:
        values: Scalar series of length `N`.
        d: Vector dimension.

    Returns:
        Array of shape `(N - d + 1, d)`.

    Raises:
        InsufficientDataError: If `N < d`.
    """
    if d < 1:
        raise ParameterError(f"delay dimension must be positive, got {d}")
    array = np.asarray(values, dtype=float)
    if len(array) < d:
        raise InsufficientDataError(
            f"{d}-dimensional delay vectors need {d} values", required=d, available=len(array)
        )
    return sliding_window_view(array, d)


def transform_values(series: PriceSeries, transform: Transform) -> pd.Series:
    """Scalar series fed to the embedding. `log_return` drops the first day."""
    match transform:
        case Transform.log_price:
            return np.log(series.close)
        case Transform.raw_price:
            return series.close
        case Transform.log_return:
            return np.log(series.close).diff().iloc[1:]
    raise ParameterError(f"unknown transform {transform!r}")


def required_observations(params: EmbeddingParams) -> int:
    """Price observations needed for a single window."""
    needed = params.d + params.w - 1
    return needed + 1 if params.transform is Transform.log_return else needed


def window_clouds(series: PriceSeries, params: EmbeddingParams) -> list[PointCloud]:
    """One point cloud per day, sliding one delay vector at a time.

    Cloud `j` holds delay vectors `j` to `j + w - 1` and is dated by the last
    sample of its last vector, so it uses nothing observed after that day.

    Raises:
        InsufficientDataError: If the series is too short for one window.
    """
    values = transform_values(series, params.transform)
    required = required_observations(params)
    if len(values) < params.d + params.w - 1:
        raise InsufficientDataError(
            f"{series.symbol}: needs at least {required} observations, has {len(series)}",
            required=required,
            available=len(series),
        )
    vectors = delay_vectors(values.to_numpy(), params.d)
    windows = sliding_window_view(vectors, (params.w, params.d))[:, 0]
    end_dates = values.index[params.d + params.w - 2 :]
    return [PointCloud(np.array(points), pd.Timestamp(end), params) for points, end in zip(windows, end_dates)]
