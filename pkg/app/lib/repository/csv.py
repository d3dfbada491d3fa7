import hashlib
import os
from collections import abc
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import pandas as pd

from .abc import AbstractRepository
from .exceptions import RepositoryException, RepositoryNotFoundException
from .filters import BeforeAfter, CollectionFilter, FilterTypes

__all__ = [
    "CsvRepository",
    "file_checksum",
]

DATE_FORMAT = "%Y-%m-%d"
DATE_COLUMNS = frozenset({"date", "as_of"})


@contextmanager
def wrap_io_exception() -> Any:
    """Do something within context to raise a `RepositoryException` chained
    from an original `OSError` or parser error.

        >>> try:
        ...     with wrap_io_exception():
        ...         raise OSError("Original Exception")
        ... except RepositoryException as exc:
        ...     print(f"caught repository exception from {type(exc.__context__)}")
        ...
        caught repository exception from <class 'OSError'>
    """
    try:
        yield
    except (OSError, pd.errors.ParserError, UnicodeDecodeError) as e:
        raise RepositoryException(f"An exception occurred: {e}") from e


def file_checksum(path: Path) -> str:
    """Hex sha256 of a file's bytes."""
    digest = hashlib.sha256()
    with wrap_io_exception(), path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


class CsvRepository(AbstractRepository[pd.DataFrame]):
    """Stores frames as UTF-8 CSV files with a header row under `root`.

    Output is deterministic: dates are written as `YYYY-MM-DD`, floats with
    their shortest round-trip representation, and rows in the order given.
    """

    suffix = ".csv"

    def __init__(self, root: Path) -> None:
        self.root = root

    def path(self, id_: str) -> Path:
        return self.root / f"{id_}{self.suffix}"

    def add(self, id_: str, data: pd.DataFrame) -> pd.DataFrame:
        target = self.path(id_)
        with wrap_io_exception():
            target.parent.mkdir(parents=True, exist_ok=True)
            tmp = target.with_suffix(f"{self.suffix}.tmp")
            data.to_csv(tmp, index=False, date_format=DATE_FORMAT, encoding="utf-8", lineterminator="\n")
            os.replace(tmp, target)
        return data

    def delete(self, id_: str) -> None:
        self.check_not_found(id_)
        with wrap_io_exception():
            self.path(id_).unlink()

    def exists(self, id_: str) -> bool:
        return self.path(id_).is_file()

    def get(self, id_: str, *filters: FilterTypes) -> pd.DataFrame:
        if not self.exists(id_):
            raise RepositoryNotFoundException(f"No artifact named '{id_}' found in {self.root}")
        with wrap_io_exception():
            frame = pd.read_csv(self.path(id_), encoding="utf-8", float_precision="round_trip", dtype={"symbol": str})
        for column in DATE_COLUMNS.intersection(frame.columns):
            frame[column] = pd.to_datetime(frame[column], format=DATE_FORMAT)
        for f in filters:
            match f:
                case BeforeAfter(field_name, before, after):
                    frame = self._filter_on_date_field(frame, field_name, before, after)
                case CollectionFilter(field_name, values):
                    frame = self._filter_in_collection(frame, field_name, values)
        return frame.reset_index(drop=True)

    def list(self) -> list[str]:
        if not self.root.is_dir():
            return []
        return sorted(p.stem for p in self.root.glob(f"*{self.suffix}"))

    def checksum(self, id_: str) -> str:
        self.check_not_found(id_)
        return file_checksum(self.path(id_))

    @staticmethod
    def _filter_in_collection(frame: pd.DataFrame, field_name: str, values: abc.Collection[Any]) -> pd.DataFrame:
        return frame[frame[field_name].isin(list(values))]

    @staticmethod
    def _filter_on_date_field(
        frame: pd.DataFrame, field_name: str, before: pd.Timestamp | None, after: pd.Timestamp | None
    ) -> pd.DataFrame:
        field = frame[field_name]
        if before is not None:
            frame = frame[field < before]
            field = frame[field_name]
        if after is not None:
            frame = frame[field > after]
        return frame
