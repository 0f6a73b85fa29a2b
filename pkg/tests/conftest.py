import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from phlcheck import seed_from_env  # noqa: E402
from phlcheck.mdpfile import read_mdp  # noqa: E402

DATA = Path(__file__).resolve().parents[1] / "src" / "phlcheck" / "data"


@pytest.fixture
def branch():
    return read_mdp(DATA / "branch.mdp")


@pytest.fixture
def seed():
    return seed_from_env(0)
