import numpy as np
import pandas as pd
import pytest

from app.domain.landscape import DiffSeries
from app.domain.scoring import (
    AllocationVector,
    FeatureMatrix,
    RfmFeatures,
    allocate,
    composite_score,
    feature_matrix,
    normalize_minmax,
    rfm_features,
)
from app.lib.exceptions import ParameterError
from app.lib.types import AllocationMode, FrequencyVariant, RecencyMode

AS_OF = pd.Timestamp("2018-02-04")


def _diffs(symbol: str, values: list[float], end: pd.Timestamp = AS_OF) -> DiffSeries:
    dates = pd.date_range(end=end, periods=len(values), freq="D", name="date")
    return DiffSeries(symbol, pd.Series(values, index=dates, name="diff_l2"))


def _matrix(*rows: tuple[str, int, float, float]) -> FeatureMatrix:
    return FeatureMatrix(AS_OF, tuple(RfmFeatures(symbol, AS_OF, r, f, m) for symbol, r, f, m in rows))


def _affine(row: RfmFeatures, column: str, slope: float, intercept: float) -> RfmFeatures:
    match column:
        case "recency":
            return row._replace(recency=int(row.recency * slope + intercept))
        case "frequency":
            return row._replace(frequency=row.frequency * slope + intercept)
    return row._replace(monetary=row.monetary * slope + intercept)


def test_rfm_features() -> None:
    features = rfm_features(_diffs("X", [0.5, -0.3, 0.2, -0.1]), AS_OF, lookback=4)
    assert features is not None
    assert (features.recency, features.frequency) == (1, 2.0)
    assert features.monetary == pytest.approx(0.3)


def test_rfm_features_all_negative() -> None:
    features = rfm_features(_diffs("X", [-0.5, -0.3, -0.2, -0.1]), AS_OF, lookback=4)
    assert features is not None
    assert (features.recency, features.frequency) == (5, 0.0)
    assert features.monetary == pytest.approx(-1.1)


def test_rfm_features_positive_on_as_of() -> None:
    features = rfm_features(_diffs("X", [-0.5, 0.1]), AS_OF, lookback=2)
    assert features is not None
    assert features.recency == 0


def test_rfm_features_only_use_lookback_window() -> None:
    features = rfm_features(_diffs("X", [9.0, 9.0, -0.1, 0.2]), AS_OF, lookback=2)
    assert features is not None
    assert features.frequency == 1.0
    assert features.monetary == pytest.approx(0.1)


def test_rfm_features_ignore_later_diffs() -> None:
    history = _diffs("X", [0.5, -0.3, 0.2, -0.1, 7.0, 7.0], end=AS_OF + pd.Timedelta(days=2))
    assert rfm_features(history, AS_OF, lookback=4) == rfm_features(_diffs("X", [0.5, -0.3, 0.2, -0.1]), AS_OF, 4)


@pytest.mark.parametrize(
    "diffs",
    [
        _diffs("X", []),
        _diffs("X", [0.1, 0.2], end=AS_OF - pd.Timedelta(days=1)),
        _diffs("X", [0.1, 0.2, 0.3]),
    ],
)
def test_rfm_features_ineligible(diffs: DiffSeries) -> None:
    assert rfm_features(diffs, AS_OF, lookback=4) is None


def test_frequency_variants_agree_on_indicator_diffs() -> None:
    values = [1.0, 0.0, 1.0, -1.0, 1.0]
    count = rfm_features(_diffs("X", values), AS_OF, 5, FrequencyVariant.count)
    magnitude = rfm_features(_diffs("X", values), AS_OF, 5, FrequencyVariant.magnitude)
    assert count is not None and magnitude is not None
    assert count.frequency == magnitude.frequency == 3.0


def test_feature_matrix_skips_ineligible() -> None:
    matrix = feature_matrix([_diffs("B", [0.1] * 4), _diffs("A", [0.2] * 4), _diffs("C", [0.1])], AS_OF, 4)
    assert [row.symbol for row in matrix.rows] == ["A", "B"]
    assert list(matrix.to_frame().columns) == ["symbol", "recency", "frequency", "monetary"]


@pytest.mark.parametrize(
    ("values", "expected"),
    [([1, 2, 3], [0, 0.5, 1]), ([5], [0]), ([4, 4, 4], [0, 0, 0]), ([-1, 1], [0, 1])],
)
def test_normalize_minmax(values: list[float], expected: list[float]) -> None:
    np.testing.assert_allclose(normalize_minmax(values), expected)


def test_normalize_minmax_empty() -> None:
    with pytest.raises(ParameterError):
        normalize_minmax([])


def test_normalize_minmax_affine_invariance(rng: np.random.Generator) -> None:
    values = rng.standard_normal(12)
    np.testing.assert_allclose(normalize_minmax(3.5 * values - 2.0), normalize_minmax(values))


def test_single_currency_scores_zero() -> None:
    for mode in RecencyMode:
        scores = composite_score(_matrix(("X", 3, 4.0, 0.5)), mode)
        assert scores["score"].tolist() == [0.0]


@pytest.mark.parametrize(("mode", "expected"), [(RecencyMode.literal, 1.8), (RecencyMode.inverted, 2.4)])
def test_composite_score(mode: RecencyMode, expected: float) -> None:
    matrix = _matrix(("A", 0, 0.0, 0.0), ("B", 2, 9.0, 0.7), ("C", 10, 10.0, 1.0))
    scores = composite_score(matrix, mode).set_index("symbol")
    assert scores.loc["B", "score"] == pytest.approx(expected)
    assert list(scores.columns) == ["recency", "frequency", "monetary", "r_z", "f_z", "m_z", "score"]


def test_composite_score_bounds(rng: np.random.Generator) -> None:
    rows = tuple(
        (f"S{i}", int(rng.integers(0, 31)), float(rng.integers(0, 30)), float(rng.normal())) for i in range(20)
    )
    scores = composite_score(_matrix(*rows))["score"]
    assert scores.between(0.0, 3.0).all()


@pytest.mark.parametrize("mode", list(RecencyMode))
@pytest.mark.parametrize(
    ("column", "slope", "intercept"), [("recency", 3, 2), ("frequency", 0.5, 4.0), ("monetary", 7.5, -3.0)]
)
def test_scores_ignore_affine_feature_transforms(
    rng: np.random.Generator, mode: RecencyMode, column: str, slope: float, intercept: float
) -> None:
    matrix = _matrix(
        *((f"S{i}", int(rng.integers(0, 31)), float(rng.integers(0, 30)), float(rng.normal())) for i in range(15))
    )
    moved = FeatureMatrix(
        AS_OF, tuple(_affine(row, column, slope, intercept) for row in matrix.rows)
    )
    base = composite_score(matrix, mode)["score"]
    transformed = composite_score(moved, mode)["score"]
    np.testing.assert_allclose(transformed.to_numpy(), base.to_numpy(), atol=1e-12)
    assert transformed.rank().equals(base.rank())


def test_frequency_and_nonpositive_days_fill_the_lookback(rng: np.random.Generator) -> None:
    for lookback in (1, 5, 30):
        for _ in range(10):
            values = np.where(rng.random(lookback + 5) < 0.2, 0.0, rng.normal(size=lookback + 5))
            diffs = _diffs("X", values.tolist())
            features = rfm_features(diffs, AS_OF, lookback)
            assert features is not None
            nonpositive = int((diffs.diffs.iloc[-lookback:] <= 0).sum())
            assert features.frequency + nonpositive == lookback


def test_composite_score_empty() -> None:
    assert composite_score(FeatureMatrix(AS_OF)).empty


@pytest.mark.parametrize(
    ("mode", "expected"),
    [
        (AllocationMode.paper_literal, [0.6, 0.3, 0.0]),
        (AllocationMode.capped, [0.6, 0.3, 0.0]),
        (AllocationMode.normalized, [2 / 3, 1 / 3, 0.0]),
    ],
)
def test_allocate(mode: AllocationMode, expected: list[float]) -> None:
    allocation = allocate(pd.Series([1.8, 0.9, 0.0], index=["A", "B", "C"]), mode, AS_OF)
    np.testing.assert_allclose(allocation.weights.to_numpy(), expected)
    assert allocation.cash == pytest.approx(1.0 - sum(expected))


@pytest.mark.parametrize("mode", list(AllocationMode))
def test_allocate_all_zero_scores(mode: AllocationMode) -> None:
    allocation = allocate({"A": 0.0, "B": 0.0}, mode)
    if mode is AllocationMode.equal_weight:
        assert allocation.weights.tolist() == [0.5, 0.5]
    else:
        assert allocation.weights.tolist() == [0.0, 0.0]
        assert allocation.cash == 1.0


def test_normalized_weights_sum_to_one(rng: np.random.Generator) -> None:
    for _ in range(20):
        scores = pd.Series(rng.uniform(0, 3, 10), index=[f"S{i}" for i in range(10)])
        assert allocate(scores, AllocationMode.normalized).invested == pytest.approx(1.0)



def test_literal_weights_may_exceed_capital() -> None:
    scores = {"A": 3.0, "B": 1.5, "C": 0.0}
    literal = allocate(scores, AllocationMode.paper_literal)
    assert literal.weights.tolist() == pytest.approx([1.0, 0.5, 0.0])
    assert literal.cash == pytest.approx(-0.5)
    capped = allocate(scores, AllocationMode.capped)
    assert capped.weights.tolist() == pytest.approx([2 / 3, 1 / 3, 0.0])
    assert capped.invested == pytest.approx(1.0)


def test_modes_differ_on_typical_scores(rng: np.random.Generator) -> None:
    rows = tuple(
        (f"S{i}", int(rng.integers(0, 31)), float(rng.integers(0, 30)), float(rng.normal())) for i in range(20)
    )
    scores = composite_score(_matrix(*rows)).set_index("symbol")["score"]
    literal = allocate(scores, AllocationMode.paper_literal)
    normalized = allocate(scores, AllocationMode.normalized)
    assert not np.allclose(literal.weights.to_numpy(), normalized.weights.to_numpy())
    np.testing.assert_allclose(literal.weights.to_numpy(), scores.to_numpy() / 20)
    assert literal.weights.rank().equals(normalized.weights.rank())


@pytest.mark.parametrize("mode", [AllocationMode.paper_literal, AllocationMode.normalized, AllocationMode.capped])
def test_zero_score_newcomer_keeps_weight_order(rng: np.random.Generator, mode: AllocationMode) -> None:
    for _ in range(20):
        scores = pd.Series(rng.uniform(0, 3, 8), index=[f"S{i}" for i in range(8)])
        before = allocate(scores, mode).weights
        after = allocate(pd.concat([scores, pd.Series({"NEW": 0.0})]), mode).weights
        assert after["NEW"] == 0.0
        assert np.argsort(after.drop("NEW").to_numpy()).tolist() == np.argsort(before.to_numpy()).tolist()
        if mode is AllocationMode.normalized:
            np.testing.assert_allclose(after.drop("NEW").to_numpy(), before.to_numpy())


def test_allocate_empty() -> None:
    with pytest.raises(ParameterError):
        allocate({}, AllocationMode.normalized)


def test_allocation_frame() -> None:
    frame = allocate({"A": 1.0, "B": 3.0}, AllocationMode.normalized, AS_OF).to_frame()
    assert frame.to_dict("list") == {
        "date": [AS_OF, AS_OF],
        "symbol": ["A", "B"],
        "weight": [0.25, 0.75],
        "mode": ["normalized", "normalized"],
    }


def test_negative_weights_rejected() -> None:
    with pytest.raises(ParameterError):
        AllocationVector(pd.Series({"A": -0.1}), AllocationMode.normalized)
