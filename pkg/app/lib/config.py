"""Pipeline configuration.

One key-value file (dotenv syntax) holds every pipeline parameter. Keys are
prefixed with `TDA_` and sections are separated by a double underscore, so the
dotted key `embedding.d` is written `TDA_EMBEDDING__D=4`. Precedence is
command-line flag > environment > file > default, and unknown keys are
rejected at every level.
"""
from collections import abc
from datetime import date
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .exceptions import ConfigError
from .types import (
    AllocationMode,
    FrequencyVariant,
    RebalanceFrequency,
    RecencyMode,
    ThresholdPolicy,
    Transform,
)

__all__ = [
    "AllocationConfig",
    "BacktestConfig",
    "DataConfig",
    "EmbeddingConfig",
    "LandscapeConfig",
    "MarketConfig",
    "OutputConfig",
    "PersistenceConfig",
    "PipelineConfig",
    "RfmConfig",
    "load_config",
]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class DataConfig(_Section):
    """Where the price dataset comes from and how its columns are named."""

    path: Path | None = None
    url: str | None = None
    cache_dir: Path = Path(".cache/datasets")
    date_column: str = "date"
    symbol_column: str = "symbol"
    close_column: str = "close"
    max_fill_gap: int = Field(default=3, ge=0)
    subset: int | None = Field(default=None, ge=1)


class EmbeddingConfig(_Section):
    d: int = Field(default=4, ge=2)
    w: int = Field(default=30, ge=3)
    transform: Transform = Transform.log_price

    @model_validator(mode="after")
    def _check_dimensions(self) -> "EmbeddingConfig":
        if self.w < self.d + 1 or 2 * self.d > self.w:
            raise ValueError(f"embedding requires w >= d + 1 and d <= w/2, got d={self.d}, w={self.w}")
        return self


class PersistenceConfig(_Section):
    threshold_policy: ThresholdPolicy = ThresholdPolicy.enclosing
    threshold: float | None = Field(default=None, ge=0.0)
    dump_diagrams: bool = False

    @model_validator(mode="after")
    def _check_threshold(self) -> "PersistenceConfig":
        if self.threshold_policy is ThresholdPolicy.fixed and self.threshold is None:
            raise ValueError("threshold_policy=fixed requires a threshold value")
        return self

    @property
    def effective_threshold(self) -> float | None:
        """Threshold handed to the Rips builder, `None` meaning the enclosing radius."""
        return self.threshold if self.threshold_policy is ThresholdPolicy.fixed else None


class LandscapeConfig(_Section):
    p: float = Field(default=2.0, ge=1.0)
    include_h0: bool = False


class RfmConfig(_Section):
    lookback: int = Field(default=30, ge=1)
    recency_mode: RecencyMode = RecencyMode.inverted
    frequency: FrequencyVariant = FrequencyVariant.count


class AllocationConfig(_Section):
    mode: AllocationMode = AllocationMode.paper_literal

    @model_validator(mode="after")
    def _check_mode(self) -> "AllocationConfig":
        if self.mode is AllocationMode.equal_weight:
            raise ValueError("equal_weight is reserved for the benchmark portfolio")
        return self


class BacktestConfig(_Section):
    start: date = date(2017, 12, 17)
    end: date = date(2019, 7, 5)
    frequency: RebalanceFrequency = RebalanceFrequency.daily
    cost_bps: float = Field(default=0.0, ge=0.0)

    @model_validator(mode="after")
    def _check_range(self) -> "BacktestConfig":
        if self.start >= self.end:
            raise ValueError(f"backtest start {self.start} must precede end {self.end}")
        return self


class MarketConfig(_Section):
    volatility_window: int = Field(default=30, ge=2)
    sharpe_window: int = Field(default=60, ge=2)
    report_symbol: str = "BTC"


class OutputConfig(_Section):
    directory: Path = Path("out")


class PipelineConfig(BaseSettings):
    """Every parameter of a pipeline run, validated before any computation."""

    model_config = SettingsConfigDict(
        env_prefix="TDA_",
        env_nested_delimiter="__",
        env_file_encoding="utf-8",
        extra="forbid",
        frozen=True,
    )

    data: DataConfig = Field(default_factory=DataConfig)
    embedding: EmbeddingConfig = Field(default_factory=EmbeddingConfig)
    persistence: PersistenceConfig = Field(default_factory=PersistenceConfig)
    landscape: LandscapeConfig = Field(default_factory=LandscapeConfig)
    rfm: RfmConfig = Field(default_factory=RfmConfig)
    allocation: AllocationConfig = Field(default_factory=AllocationConfig)
    backtest: BacktestConfig = Field(default_factory=BacktestConfig)
    market: MarketConfig = Field(default_factory=MarketConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    def snapshot(self) -> dict[str, Any]:
        """JSON-compatible copy of the configuration, sufficient to rebuild it."""
        return self.model_dump(mode="json")


def _prune(overrides: abc.Mapping[str, Any]) -> dict[str, Any]:
    pruned: dict[str, Any] = {}
    for key, value in overrides.items():
        if isinstance(value, abc.Mapping):
            value = _prune(value)
            if not value:
                continue
        elif value is None:
            continue
        pruned[key] = value
    return pruned


def load_config(path: Path | None = None, **overrides: Any) -> PipelineConfig:
    """Build the pipeline configuration.

    Args:
        path: Key-value config file, optional.
        **overrides: Section mappings from the command line, e.g.,
            `allocation={"mode": "normalized"}`. `None` values are ignored.

    Returns:
        The validated configuration.

    Raises:
        ConfigError: If the file is missing, a key is unknown or a value is invalid.
    """
    if path is not None and not path.is_file():
        raise ConfigError(f"Config file not found: {path}")
    try:
        return PipelineConfig(_env_file=path, **_prune(overrides))  # type:ignore[call-arg]
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}") from e


def _merge(base: abc.Mapping[str, Any], overrides: abc.Mapping[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, abc.Mapping) and isinstance(merged.get(key), abc.Mapping):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def config_from_snapshot(snapshot: abc.Mapping[str, Any], **overrides: Any) -> PipelineConfig:
    """Rebuild a configuration from a run manifest snapshot.

    Args:
        snapshot: The `config` mapping of a run manifest.
        **overrides: Section mappings from the command line, applied on top
            of the snapshot. `None` values are ignored.

    Raises:
        ConfigError: If the snapshot no longer validates.
    """
    try:
        return PipelineConfig(**_merge(snapshot, _prune(overrides)))
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration snapshot: {e}") from e
