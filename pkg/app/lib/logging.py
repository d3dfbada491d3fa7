import logging
import logging.config
import re
from http import HTTPStatus
from typing import Any

from . import settings

__all__ = ["RequestLogFilter", "config", "configure"]


class RequestLogFilter(logging.Filter):
    """Filter for omitting httpx request records based on request URL.

    Successful downloads are already logged by the fetch stage together with
    the checksum of what was stored, so the client's own line is noise.

    Parameters
    ----------
    *args : Any
        Unpacked into [`logging.Filter.__init__()`][logging.Filter].
    url_re : str
        Regex, successful requests to matching URLs are filtered.
    **kwargs : Any
        Unpacked into [`logging.Filter.__init__()`][logging.Filter].
    """

    def __init__(self, *args: Any, url_re: str, **kwargs: Any) -> None:
        super().__init__(*args, **kwargs)
        self.url_filter = re.compile(url_re)

    def filter(self, record: logging.LogRecord) -> bool:
        if not isinstance(record.args, tuple) or len(record.args) != 5:
            return True
        _, url, _, status_code, _ = record.args
        if self.url_filter.match(str(url)) and status_code == HTTPStatus.OK:
            return False
        return True


config: dict[str, Any] = {
    "version": 1,
    "disable_existing_loggers": False,
    "filters": {
        "request_filter": {
            "()": RequestLogFilter,
            "url_re": r"^https?://",
        }
    },
    "formatters": {"standard": {"format": "%(levelname)s - %(asctime)s - %(name)s - %(funcName)s - %(message)s"}},
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "standard",
            "stream": "ext://sys.stderr",
        }
    },
    "root": {"level": settings.app.LOG_LEVEL, "handlers": ["console"]},
    "loggers": {
        "app": {
            "propagate": True,
        },
        "httpx": {
            "propagate": True,
            "filters": ["request_filter"],
        },
        "joblib": {
            "propagate": True,
        },
    },
}
"""Pre-configured log config for application."""


def configure(level: str | None = None) -> None:
    """Apply [`config`][app.lib.logging.config], optionally overriding the root level."""
    applied = {**config, "root": {**config["root"], "level": level or settings.app.LOG_LEVEL}}
    logging.config.dictConfig(applied)
