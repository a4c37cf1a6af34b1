import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from indefbif import NewtonConfig, build_grid, sample_weight, SinDescriptor


@pytest.fixture(scope="session")
def grid999():
    return build_grid(999)


@pytest.fixture(scope="session")
def grid199():
    return build_grid(199)


@pytest.fixture(scope="session")
def sin1_999(grid999):
    return sample_weight(SinDescriptor(1), grid999)


@pytest.fixture(scope="session")
def sin2_999(grid999):
    return sample_weight(SinDescriptor(2), grid999)


@pytest.fixture(scope="session")
def newton_cfg():
    return NewtonConfig()
