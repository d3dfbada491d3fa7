from abc import ABCMeta, abstractmethod
from typing import TYPE_CHECKING, Generic, TypeVar

from .exceptions import RepositoryNotFoundException

if TYPE_CHECKING:
    from .filters import FilterTypes

__all__ = ["AbstractRepository"]

T = TypeVar("T")


class AbstractRepository(Generic[T], metaclass=ABCMeta):
    """Named artifacts produced by one pipeline stage and read by the next."""

    @abstractmethod
    def add(self, id_: str, data: T) -> T:
        """Store `data` under `id_`, replacing any previous artifact.

        Args:
            id_: Artifact name.
            data: Artifact to be stored.

        Returns:
            The stored artifact.
        """

    @abstractmethod
    def delete(self, id_: str) -> None:
        """Delete the artifact named `id_`.

        Args:
            id_: Artifact name.

        Raises:
            RepositoryNotFoundException: If no artifact named `id_` exists.
        """

    @abstractmethod
    def exists(self, id_: str) -> bool:
        """Whether an artifact named `id_` has been stored."""

    @abstractmethod
    def get(self, id_: str, *filters: "FilterTypes") -> T:
        """Get the artifact named `id_`, optionally filtered.

        Args:
            id_: Artifact name.
            *filters: Row filters applied after loading.

        Returns:
            The retrieved artifact.

        Raises:
            RepositoryNotFoundException: If no artifact named `id_` exists.
        """

    @abstractmethod
    def list(self) -> list[str]:
        """Names of every stored artifact, sorted."""

    @abstractmethod
    def checksum(self, id_: str) -> str:
        """Hex sha256 of the stored artifact named `id_`."""

    def check_not_found(self, id_: str, hint: str | None = None) -> None:
        """Raise `RepositoryNotFoundException` if `id_` has not been stored.

        Args:
            id_: Artifact name.
            hint: Appended to the message, e.g., the command that produces the artifact.
        """
        if not self.exists(id_):
            message = f"No artifact named '{id_}' found"
            raise RepositoryNotFoundException(f"{message}; {hint}" if hint else message)
