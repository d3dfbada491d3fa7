import logging
import time
from collections import abc
from contextlib import contextmanager
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Any

import orjson

from . import constants, settings
from .exceptions import ConfigError
from .repository.csv import wrap_io_exception

__all__ = ["RunManifest", "package_versions"]

logger = logging.getLogger(__name__)

TRACKED_PACKAGES = ("crypto-tda-portfolio", "numpy", "pandas", "scipy", "joblib", "pydantic", "pydantic-settings")


def package_versions() -> dict[str, str]:
    versions: dict[str, str] = {}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


@dataclass
class RunManifest:
    """Record of one CLI run.

    Written once, when the run finishes or fails, next to the artifacts it
    describes. A failed run records its exit code and whatever artifacts were
    stored before the failure.

    `config` is the full configuration snapshot, enough to rebuild the run.
    """

    command: str
    config: dict[str, Any]
    dataset_checksum: str | None = None
    exit_code: int = 0
    artifacts: dict[str, str] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    versions: dict[str, str] = field(default_factory=package_versions)

    @contextmanager
    def stage(self, name: str) -> abc.Iterator[None]:
        """Time the body of the `with` block as stage `name`."""
        started = time.perf_counter()
        logger.info("stage %s started", name)
        try:
            yield
        finally:
            self.timings[name] = round(time.perf_counter() - started, 6)
            logger.info("stage %s finished in %.3fs", name, self.timings[name])

    def record(self, id_: str, checksum: str) -> None:
        self.artifacts[id_] = checksum

    def as_dict(self) -> dict[str, Any]:
        return {
            "app": settings.app.slug,
            "command": self.command,
            "build_number": settings.app.BUILD_NUMBER,
            "config": self.config,
            "dataset_checksum": self.dataset_checksum,
            "exit_code": self.exit_code,
            "artifacts": dict(sorted(self.artifacts.items())),
            "versions": self.versions,
            "timings": self.timings,
        }

    def write(self, directory: Path) -> Path:
        target = directory / f"{constants.MANIFEST_PREFIX}{self.command}.json"
        with wrap_io_exception():
            directory.mkdir(parents=True, exist_ok=True)
            target.write_bytes(orjson.dumps(self.as_dict(), option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS))
        logger.info("manifest written to %s", target)
        return target

    @staticmethod
    def read(path: Path) -> dict[str, Any]:
        with wrap_io_exception():
            loaded: dict[str, Any] = orjson.loads(path.read_bytes())
        return loaded

    @classmethod
    def read_snapshot(cls, path: Path) -> dict[str, Any]:
        """Configuration snapshot of a manifest, for replaying its run.

        Raises:
            ConfigError: If the file is missing, unreadable, or holds no snapshot.
        """
        if not path.is_file():
            raise ConfigError(f"Manifest not found: {path}")
        try:
            snapshot = orjson.loads(path.read_bytes()).get("config")
        except (OSError, orjson.JSONDecodeError, AttributeError) as e:
            raise ConfigError(f"Unreadable manifest {path}: {e}") from e
        if not isinstance(snapshot, dict):
            raise ConfigError(f"Manifest {path} has no configuration snapshot")
        return snapshot
