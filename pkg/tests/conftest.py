import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lacamx import backend


def pytest_addoption(parser):
    parser.addoption(
        "--backend",
        choices=["auto", "compiled", "python"],
        default="auto",
        help="kernel backend the suite runs against",
    )


@pytest.fixture(scope="session", autouse=True)
def _select_backend(request):
    backend.select(request.config.getoption("--backend"))
    yield
    backend.select("auto")


@pytest.fixture
def both_backends():
    """Yield each available backend name, restoring the default afterwards."""
    yield backend.available()
    backend.select("auto")
