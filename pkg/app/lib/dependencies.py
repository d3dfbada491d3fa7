from collections import abc
from dataclasses import dataclass
from pathlib import Path

import pandas as pd

from .config import PipelineConfig
from .manifest import RunManifest
from .repository import CsvRepository
from .service import Service
from .worker import WorkerPool, create_worker_instance

__all__ = ["Command", "RunContext", "provide_context"]


@dataclass
class RunContext:
    """Everything a subcommand handler needs.

    Attributes
    ----------
    config : PipelineConfig
        Validated pipeline configuration.
    service : Service[pd.DataFrame]
        Stage artifacts under the output directory.
    pool : WorkerPool
        Process pool for per-currency work.
    manifest : RunManifest
        Manifest of the current run, written when the handler returns.
    """

    config: PipelineConfig
    service: Service[pd.DataFrame]
    pool: WorkerPool
    manifest: RunManifest

    @property
    def output_dir(self) -> Path:
        return self.config.output.directory

    def store(self, id_: str, frame: pd.DataFrame) -> None:
        """Write a stage artifact and record its checksum in the manifest."""
        self.service.create(id_, frame)
        self.manifest.record(id_, self.service.repository.checksum(id_))


@dataclass(frozen=True)
class Command:
    name: str
    help: str
    handler: abc.Callable[[RunContext], None]


def provide_context(command: str, config: PipelineConfig, jobs: int | None = None) -> RunContext:
    """Constructs repository, service and worker pool objects for the run.

    Args:
        command: Subcommand name, used to name the manifest.
        config: Validated pipeline configuration.
        jobs: `--jobs` value, `None` to use settings.

    Returns:
        The run context.
    """
    service: Service[pd.DataFrame] = Service(CsvRepository(config.output.directory))
    return RunContext(
        config=config,
        service=service,
        pool=create_worker_instance(jobs),
        manifest=RunManifest(command=command, config=config.snapshot()),
    )
