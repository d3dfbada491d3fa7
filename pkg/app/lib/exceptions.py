import logging
from collections import abc
from enum import IntEnum
from typing import Any

import sentry_sdk

from .repository.exceptions import RepositoryNotFoundException

__all__ = [
    "ConfigError",
    "DataError",
    "ExitCode",
    "FetchError",
    "IngestError",
    "InsufficientDataError",
    "LookAheadError",
    "OracleRefusal",
    "ParameterError",
    "PipelineException",
    "after_exception_hook_handler",
    "exception_to_exit_code",
]

logger = logging.getLogger(__name__)


class PipelineException(Exception):
    """Base class for pipeline related exceptions."""


class ConfigError(PipelineException):
    """Configuration could not be loaded or validated."""


class ParameterError(PipelineException):
    """An operation received a parameter outside its domain."""


class OracleRefusal(ParameterError):
    """The reference reducer was asked to work on a cloud that is too large."""


class DataError(PipelineException):
    """Base class for problems with the input data."""


class IngestError(DataError):
    """The price file cannot be read.

    Args:
        message: What went wrong.
        row: 1-based data row (header excluded) that triggered the error, if any.
    """

    def __init__(self, message: str, *, row: int | None = None) -> None:
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class FetchError(DataError):
    """The dataset could not be downloaded and no cached copy exists."""


class InsufficientDataError(DataError):
    """A series is too short for the requested operation.

    Args:
        message: What went wrong.
        required: Minimum number of observations the operation needs.
        available: Number of observations that were supplied.
    """

    def __init__(self, message: str, *, required: int, available: int | None = None) -> None:
        super().__init__(message)
        self.required = required
        self.available = available


class LookAheadError(PipelineException):
    """A strategy asked for data dated after its decision day."""


class ExitCode(IntEnum):
    OK = 0
    INTERNAL = 1
    CONFIG = 2
    DATA = 3


def exception_to_exit_code(exc: BaseException) -> ExitCode:
    """Transform exceptions to process exit codes.

    Args:
        exc: Exception raised during the run.

    Returns:
        Exit code appropriate to the type of original exception.
    """
    if isinstance(exc, (ConfigError, ParameterError)):
        return ExitCode.CONFIG
    if isinstance(exc, (DataError, RepositoryNotFoundException)):
        return ExitCode.DATA
    return ExitCode.INTERNAL


def after_exception_hook_handler(exc: BaseException, context: abc.Mapping[str, Any]) -> None:
    """Logs exception and reports internal errors to sentry.

    Args:
        exc: the exception that was raised.
        context: the command and configuration the run was started with.
    """
    if exception_to_exit_code(exc) is ExitCode.INTERNAL:
        logger.error("Pipeline Exception\n\nRun Context: %s\n\n", dict(context), exc_info=exc)
        sentry_sdk.capture_exception(exc)
    else:
        logger.error("%s: %s", type(exc).__name__, exc)
