from collections import abc

import numpy as np
import pytest


@pytest.fixture()
def cli() -> abc.Callable[..., int]:
    """Always use this `cli` fixture and never do `from app.main import run`
    inside a test module. We need to delay import of the `app.main` module
    until as late as possible to ensure we can mock everything necessary before
    the parser and command registry are constructed.

    Returns:
        The console entry point.
    """
    # don't want main imported until everything patched.
    from app.main import run  # pylint: disable=import-outside-toplevel

    return run


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20171217)
