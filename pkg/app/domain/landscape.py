"""Persistence landscapes, their exact Lp-norms and the daily norm series."""
import logging
from collections import abc
from dataclasses import dataclass

import numpy as np
import pandas as pd

from app.lib.exceptions import InsufficientDataError, ParameterError

from .embedding import EmbeddingParams, window_clouds
from .market_data import PriceSeries
from .persistence import PersistenceDiagram, build_rips, compute_persistence, distance_matrix

__all__ = [
    "DiffSeries",
    "NormSeries",
    "PersistenceLandscape",
    "diff_series",
    "evaluate",
    "landscape_from_diagram",
    "landscape_from_pairs",
    "lp_norm",
    "market_diff_series",
    "norm_series",
    "norms_from_diagrams",
    "window_diagrams",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PersistenceLandscape:
    """Levels `λ_1 >= λ_2 >= ...`, each an `(m, 2)` array of `(x, value)`
    critical points, starting and ending at value 0 and linear in between."""

    levels: tuple[np.ndarray, ...] = ()

    def __len__(self) -> int:
        return len(self.levels)

    @property
    def support(self) -> tuple[float, float] | None:
        if not self.levels:
            return None
        return min(float(level[0, 0]) for level in self.levels), max(float(level[-1, 0]) for level in self.levels)


@dataclass(frozen=True, eq=False)
class NormSeries:
    symbol: str
    norms: pd.Series

    def __len__(self) -> int:
        return len(self.norms)


@dataclass(frozen=True, eq=False)
class DiffSeries:
    symbol: str
    diffs: pd.Series

    def __len__(self) -> int:
        return len(self.diffs)

    def truncate(self, as_of: pd.Timestamp) -> "DiffSeries":
        return DiffSeries(self.symbol, self.diffs.loc[: pd.Timestamp(as_of)])


def _trim(xs: np.ndarray, ys: np.ndarray) -> np.ndarray | None:
    positive = np.flatnonzero(ys > 0)
    if not len(positive):
        return None
    first, last = max(positive[0] - 1, 0), min(positive[-1] + 1, len(xs) - 1)
    return np.column_stack((xs[first : last + 1], ys[first : last + 1]))


def landscape_from_pairs(pairs: np.ndarray) -> PersistenceLandscape:
    """Exact landscape of finite `(birth, death)` rows.

    Between consecutive points of {births, deaths, midpoints and the
    crossings `(b_i + d_j) / 2`} every tent is linear and their order is
    fixed, so each level is linear there too.
    """
    pairs = np.asarray(pairs, dtype=float).reshape(-1, 2)
    pairs = pairs[pairs[:, 1] > pairs[:, 0]]
    if not len(pairs):
        return PersistenceLandscape()
    births, deaths = pairs[:, 0], pairs[:, 1]
    crossings = (births[:, None] + deaths[None, :]) / 2
    xs = np.unique(np.concatenate((births, deaths, (births + deaths) / 2, crossings.ravel())))
    xs = xs[(xs >= births.min()) & (xs <= deaths.max())]
    tents = np.maximum(0.0, np.minimum(xs[None, :] - births[:, None], deaths[:, None] - xs[None, :]))
    ranked = -np.sort(-tents, axis=0)
    levels = []
    for row in ranked:
        level = _trim(xs, row)
        if level is None:
            break
        levels.append(level)
    return PersistenceLandscape(tuple(levels))


def landscape_from_diagram(
    diagram: PersistenceDiagram, dimensions: int | abc.Iterable[int] = 1
) -> PersistenceLandscape:
    """Landscape of the finite pairs of the given homology dimensions.

    Essential pairs have no tent and are left out.
    """
    wanted = {dimensions} if isinstance(dimensions, int) else set(dimensions)
    return landscape_from_pairs(np.vstack([diagram.finite(k) for k in sorted(wanted)]))


def evaluate(landscape: PersistenceLandscape, x: float | abc.Sequence[float] | np.ndarray) -> np.ndarray:
    """Values of every level at `x`, shape `(levels, len(x))`."""
    points = np.atleast_1d(np.asarray(x, dtype=float))
    if not landscape.levels:
        return np.zeros((0, len(points)))
    return np.vstack([np.interp(points, level[:, 0], level[:, 1], left=0.0, right=0.0) for level in landscape.levels])


def _segment_integrals(y0: np.ndarray, y1: np.ndarray, dx: np.ndarray, p: float) -> np.ndarray:
    if float(p).is_integer():
        n = int(p)
        return dx * sum(y0**i * y1 ** (n - i) for i in range(n + 1)) / (n + 1)
    dy = y1 - y0
    flat = np.abs(dy) < 1e-15
    with np.errstate(divide="ignore", invalid="ignore"):
        sloped = dx * (y1 ** (p + 1) - y0 ** (p + 1)) / ((p + 1) * dy)
    return np.where(flat, dx * y0**p, sloped)


def lp_norm(landscape: PersistenceLandscape, p: float = 2.0) -> float:
    """`(Σ_k ∫ λ_k(x)^p dx)^(1/p)`, integrated exactly over each linear piece.

    Raises:
        ParameterError: If `p < 1`.
    """
    if p < 1:
        raise ParameterError(f"landscape norm exponent must be at least 1, got {p}")
    total = 0.0
    for level in landscape.levels:
        xs, ys = level[:, 0], level[:, 1]
        total += float(_segment_integrals(ys[:-1], ys[1:], np.diff(xs), p).sum())
    return float(total ** (1 / p)) if total > 0 else 0.0


def window_diagrams(
    series: PriceSeries, params: EmbeddingParams, threshold: float | None = None
) -> list[PersistenceDiagram]:
    """Persistence diagram of every window cloud of a series, oldest first."""
    return [
        compute_persistence(build_rips(distance_matrix(cloud), 2, threshold), cloud.window_end_date)
        for cloud in window_clouds(series, params)
    ]


def norms_from_diagrams(
    symbol: str, diagrams: abc.Sequence[PersistenceDiagram], p: float = 2.0, include_h0: bool = False
) -> NormSeries:
    dimensions = (0, 1) if include_h0 else (1,)
    values = [lp_norm(landscape_from_diagram(diagram, dimensions), p) for diagram in diagrams]
    dates = pd.DatetimeIndex([diagram.date for diagram in diagrams], name="date")
    return NormSeries(symbol, pd.Series(values, index=dates, name="l2_norm", dtype=float))


def norm_series(
    series: PriceSeries,
    params: EmbeddingParams,
    *,
    threshold: float | None = None,
    p: float = 2.0,
    include_h0: bool = False,
) -> NormSeries:
    """Landscape norm of every window of a series, dated by window end.

    Raises:
        InsufficientDataError: If the series is too short for one window.
    """
    return norms_from_diagrams(series.symbol, window_diagrams(series, params, threshold), p, include_h0)


def diff_series(norms: NormSeries) -> DiffSeries:
    """First differences of a norm series, dated by the later day.

    Raises:
        InsufficientDataError: If fewer than 2 norms are given.
    """
    if len(norms) < 2:
        raise InsufficientDataError(
            f"{norms.symbol}: norm differences need 2 norms", required=2, available=len(norms)
        )
    return DiffSeries(norms.symbol, norms.norms.diff().iloc[1:].rename("diff_l2"))


def market_diff_series(diffs: abc.Iterable[DiffSeries]) -> pd.Series:
    """Mean norm difference across the currencies with a value on each day."""
    columns = {item.symbol: item.diffs for item in diffs}
    if not columns:
        return pd.Series(dtype=float, index=pd.DatetimeIndex([], name="date"), name="mean_diff_l2")
    frame = pd.concat(columns, axis=1).sort_index()
    frame.index.name = "date"
    return frame.mean(axis=1).rename("mean_diff_l2")
