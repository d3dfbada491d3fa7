import logging
from collections import abc
from typing import Any, TypeVar

from joblib import Parallel, delayed

from . import settings

__all__ = [
    "WorkerPool",
    "create_worker_instance",
]

logger = logging.getLogger(__name__)

R = TypeVar("R")


class WorkerPool:
    """Process pool for independent per-currency tasks.

    Wraps [`joblib.Parallel`](https://joblib.readthedocs.io/en/stable/generated/joblib.Parallel.html).
    Results always come back in task order, so the caller is the single
    collector and output written from them is deterministic.

    Parameters
    ----------
    jobs : int | None
        Worker processes, `-1` for every core. Defaults to `settings.worker.JOBS`.
    backend : str | None
        joblib backend. Defaults to `settings.worker.BACKEND`.
    """

    def __init__(self, jobs: int | None = None, backend: str | None = None) -> None:
        self.jobs = settings.worker.JOBS if jobs is None else jobs
        self.backend = backend or settings.worker.BACKEND

    def map(self, fn: abc.Callable[..., R], tasks: abc.Iterable[tuple[Any, ...]]) -> list[R]:
        """Call `fn(*task)` for every task.

        Args:
            fn: Module-level, side-effect free function.
            tasks: Positional argument tuples.

        Returns:
            One result per task, in task order.
        """
        tasks = list(tasks)
        if self.jobs == 1 or len(tasks) <= 1:
            return [fn(*task) for task in tasks]
        logger.debug("dispatching %d tasks to %s workers (%s)", len(tasks), self.jobs, self.backend)
        parallel = Parallel(n_jobs=self.jobs, backend=self.backend, batch_size=settings.worker.BATCH_SIZE)
        return list(parallel(delayed(fn)(*task) for task in tasks))


def create_worker_instance(jobs: int | None = None) -> WorkerPool:
    """

    Args:
        jobs: Worker count from the command line, `None` to use settings.

    Returns:
        The worker pool instance.
    """
    return WorkerPool(jobs)
