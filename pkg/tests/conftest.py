import time

import pytest

from benchmark import BenchmarkWorld


@pytest.fixture(scope="session")
def world():
    """Trained two-corpus benchmark pipeline; built once per session."""
    start = time.monotonic()
    built = BenchmarkWorld()
    built.build_seconds = time.monotonic() - start
    return built
