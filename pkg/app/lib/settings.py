"""All process configuration via environment.

Take note of the environment variable prefixes required for each
settings class, except `AppSettings`. Pipeline parameters are not
process configuration, they live in [`PipelineConfig`][app.lib.config.PipelineConfig].
"""
from typing import Literal

from pydantic_settings import BaseSettings, SettingsConfigDict


# noinspection PyUnresolvedReferences
class AppSettings(BaseSettings):
    """Generic application settings. These settings are copied into every run
    manifest, so do not include any sensitive values here.

    Attributes
    ----------
    BUILD_NUMBER : str
        Identity of the CI build of current app instance.
    DEBUG : bool
        If `True` unexpected errors are re-raised after being logged.
    ENVIRONMENT : str
        "dev", "prod", etc.
    LOG_LEVEL : str
        Stdlib log level names, "DEBUG", "INFO", etc.
    NAME : str
        App name.
    """

    model_config = SettingsConfigDict(case_sensitive=True)

    BUILD_NUMBER: str = "0"
    DEBUG: bool = False
    ENVIRONMENT: str = "local"
    LOG_LEVEL: str = "INFO"
    NAME: str = "crypto-tda-portfolio"

    @property
    def slug(self) -> str:
        """A slugified name.

        Returns
        -------
        str
            `self.NAME`, all lowercase and hyphens instead of spaces.
        """
        return "-".join(s.lower() for s in self.NAME.split())


# noinspection PyUnresolvedReferences
class SentrySettings(BaseSettings):
    """Configures sentry for the application.

    Attributes
    ----------
    DSN : str
        The sentry DSN. Set as empty string to disable sentry reporting.
    TRACES_SAMPLE_RATE : float
        % of runs traced by sentry, `0.0` means none, `1.0` means all.
    """

    model_config = SettingsConfigDict(env_prefix="SENTRY_", case_sensitive=True)

    DSN: str = ""
    TRACES_SAMPLE_RATE: float = 0.0


# noinspection PyUnresolvedReferences
class WorkerSettings(BaseSettings):
    """Configures the process pool used for per-currency work.

    Prefix all environment variables with `WORKER_`, e.g., `WORKER_JOBS`.

    Attributes
    ----------
    JOBS : int
        Number of worker processes, `-1` uses every available core.
    BACKEND : str
        joblib backend name.
    BATCH_SIZE : int | "auto"
        Tasks dispatched to a worker at once.
    """

    model_config = SettingsConfigDict(env_prefix="WORKER_", case_sensitive=True)

    JOBS: int = -1
    BACKEND: Literal["loky", "multiprocessing", "threading"] = "loky"
    BATCH_SIZE: int | Literal["auto"] = "auto"


app = AppSettings()
sentry = SentrySettings()
worker = WorkerSettings()
