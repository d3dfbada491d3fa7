import sentry_sdk

from . import settings


def configure() -> None:
    """Callback to configure sentry on run startup.

    See [SentrySettings][app.lib.settings.SentrySettings].
    """
    sentry_sdk.init(
        dsn=settings.sentry.DSN,
        environment=settings.app.ENVIRONMENT,
        release=settings.app.BUILD_NUMBER,
        traces_sample_rate=settings.sentry.TRACES_SAMPLE_RATE,
    )
