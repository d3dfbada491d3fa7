from .csv import CsvRepository, file_checksum
from .exceptions import RepositoryException, RepositoryNotFoundException
from .filters import BeforeAfter, CollectionFilter, FilterTypes

__all__ = [
    "BeforeAfter",
    "CollectionFilter",
    "CsvRepository",
    "FilterTypes",
    "RepositoryException",
    "RepositoryNotFoundException",
    "file_checksum",
]
