import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from convexsphere.sphere import build_grid


@pytest.fixture(scope="session")
def grid2():
    return build_grid(2)


@pytest.fixture(scope="session")
def grid3():
    return build_grid(3)


@pytest.fixture(scope="session")
def grid4():
    return build_grid(4)
