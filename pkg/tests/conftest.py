import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def random_dynamic(rng):
    """Seeded complex (3, 8, 8) tensor used across operator tests."""
    return rng.standard_normal((3, 8, 8)) + 1j * rng.standard_normal((3, 8, 8))
