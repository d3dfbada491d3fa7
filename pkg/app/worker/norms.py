from typing import Any, NamedTuple

import pandas as pd

from app.domain.embedding import EmbeddingParams
from app.domain.landscape import DiffSeries, NormSeries, diff_series, norms_from_diagrams, window_diagrams
from app.domain.market_data import PriceSeries, longest_segment
from app.domain.persistence import diagram_records
from app.lib.exceptions import InsufficientDataError


class CurrencyNorms(NamedTuple):
    symbol: str
    norms: NormSeries | None
    diffs: DiffSeries | None
    skipped: tuple[int, int] | None
    diagrams: list[dict[str, Any]]


def currency_norms(
    series: PriceSeries,
    params: EmbeddingParams,
    threshold: float | None,
    p: float,
    include_h0: bool,
    max_fill_gap: int,
    dump_diagrams: bool,
) -> CurrencyNorms:
    """Norm and difference series of one currency.

    Runs in a worker process. Gaps are filled first and only the longest
    contiguous segment is embedded.

    Returns:
        The series, or the observation count and requirement when the
        currency is too short for a single window.
    """
    segment = longest_segment(series, max_fill_gap)
    try:
        diagrams = window_diagrams(segment, params, threshold)
    except InsufficientDataError as e:
        return CurrencyNorms(series.symbol, None, None, (len(segment), e.required), [])
    norms = norms_from_diagrams(series.symbol, diagrams, p, include_h0)
    if len(norms) >= 2:
        diffs = diff_series(norms)
    else:
        empty = pd.Series(dtype=float, index=pd.DatetimeIndex([], name="date"), name="diff_l2")
        diffs = DiffSeries(series.symbol, empty)
    records = [row for diagram in diagrams for row in diagram_records(series.symbol, diagram)] if dump_diagrams else []
    return CurrencyNorms(series.symbol, norms, diffs, None, records)
