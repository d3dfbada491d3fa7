__all__ = [
    "config",
    "constants",
    "dependencies",
    "exceptions",
    "logging",
    "manifest",
    "repository",
    "sentry",
    "service",
    "settings",
    "types",
    "worker",
]
