class RepositoryException(Exception):
    """Base repository exception type."""


class RepositoryNotFoundException(RepositoryException):
    """Raised when an artifact is requested by name and no artifact with that
    name exists, e.g., a stage cache that has not been produced yet."""
