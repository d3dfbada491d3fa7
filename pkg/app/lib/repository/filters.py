from collections import abc
from dataclasses import dataclass
from typing import Generic, TypeVar

import pandas as pd

T = TypeVar("T")


@dataclass(frozen=True)
class BeforeAfter:
    """Data required to filter rows on a date column."""

    field_name: str
    """Name of the column to filter on."""
    before: pd.Timestamp | None
    """Keep rows where field is strictly earlier than this day."""
    after: pd.Timestamp | None
    """Keep rows where field is strictly later than this day."""


@dataclass(frozen=True)
class CollectionFilter(Generic[T]):
    """Data required to keep rows whose column value is in a collection."""

    field_name: str
    """Name of the column to filter on."""
    values: abc.Collection[T]
    """Values to keep."""


FilterTypes = BeforeAfter | CollectionFilter
