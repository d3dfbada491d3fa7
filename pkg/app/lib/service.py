import logging
from collections import abc
from typing import TYPE_CHECKING, Generic, TypeVar

from . import constants

if TYPE_CHECKING:
    from .repository.abc import AbstractRepository
    from .repository.filters import FilterTypes

__all__ = ["Service"]

logger = logging.getLogger(__name__)

T = TypeVar("T")

PRODUCED_BY: abc.Mapping[str, str] = {
    constants.UNIVERSE: "ingest",
    constants.REJECTIONS: "ingest",
    constants.NORMS: "norms",
    constants.DIFFS: "norms",
    constants.SKIPPED: "norms",
    constants.DIAGRAMS: "norms",
    constants.SCORES: "score",
    constants.WEIGHTS: "score",
    constants.RETURNS: "backtest",
    constants.MONTHLY: "backtest",
}
"""Subcommand that writes each stage artifact."""


class Service(Generic[T]):
    def __init__(self, repository: "AbstractRepository[T]") -> None:
        """Generic stage artifact service.

        Args:
            repository: Instance conforming to `AbstractRepository` interface.
        """
        self.repository = repository

    def create(self, id_: str, data: T) -> T:
        """Wraps repository add operation.

        Args:
            id_: Artifact name.
            data: Artifact to be stored.

        Returns:
            The stored artifact.
        """
        logger.debug("writing artifact %s", id_)
        return self.repository.add(id_, data)

    def get(self, id_: str, *filters: "FilterTypes") -> T:
        """Wraps repository get operation, naming the stage to run when the
        artifact is missing.

        Args:
            id_: Artifact name.
            *filters: Row filters.

        Returns:
            The artifact named `id_`.
        """
        producer = PRODUCED_BY.get(id_)
        self.repository.check_not_found(id_, hint=f"run `crypto-tda {producer}` first" if producer else None)
        return self.repository.get(id_, *filters)

    def exists(self, id_: str) -> bool:
        return self.repository.exists(id_)

    def list(self) -> list[str]:
        return self.repository.list()

    def delete(self, id_: str) -> None:
        self.repository.delete(id_)
