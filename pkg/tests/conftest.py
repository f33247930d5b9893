import os
import tempfile

import pytest

# Keep test logs out of the working tree; must run before bootperc is imported.
os.environ.setdefault("BOOTPERC_LOG_DIR", os.path.join(tempfile.gettempdir(), "bootperc-test-logs"))

from bootperc.family import ThresholdFamily  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long Monte Carlo runs, enabled with BOOTPERC_RUN_SLOW=1")


def pytest_collection_modifyitems(config, items):
    if os.getenv("BOOTPERC_RUN_SLOW"):
        return
    skip_slow = pytest.mark.skip(reason="BOOTPERC_RUN_SLOW not set – skipping long Monte Carlo run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def square_family():
    """Two-neighbour rule on the square lattice."""
    return ThresholdFamily.of(1, 1, r=2)


@pytest.fixture
def subcritical_2d():
    return ThresholdFamily.of(1, 2, r=4)


@pytest.fixture
def beams_family():
    return ThresholdFamily.of(1, 1, 2, r=4)
