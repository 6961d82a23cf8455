import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from sumprodlab import GridSet

settings.register_profile(
    "suite", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")


@st.composite
def grid_sets(draw, min_m=2, max_m=8, max_size=48, upper_half=False):
    """A nonempty GridSet at a random scale, optionally confined to [1/2, 1]."""
    m = draw(st.integers(min_m, max_m))
    lo = 2 ** (m - 1) if upper_half else 0
    hi = 2**m if upper_half else 2**m - 1
    cells = draw(st.sets(st.integers(lo, hi), min_size=1, max_size=max_size))
    return GridSet(m, cells)


@st.composite
def grid_pairs(draw, min_m=2, max_m=8, max_size=48):
    """Two nonempty GridSets sharing a scale exponent."""
    m = draw(st.integers(min_m, max_m))
    ints = st.integers(0, 2**m - 1)
    a = draw(st.sets(ints, min_size=1, max_size=max_size))
    b = draw(st.sets(ints, min_size=1, max_size=max_size))
    return GridSet(m, a), GridSet(m, b)


def random_grid(rng: np.random.Generator, m: int, max_size: int, upper_half=False) -> GridSet:
    lo = 2 ** (m - 1) if upper_half else 0
    hi = 2**m + 1 if upper_half else 2**m
    size = int(rng.integers(1, max_size + 1))
    cells = rng.integers(lo, hi, size=size)
    return GridSet(m, np.unique(cells).tolist())


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=0xC0FFEE))
