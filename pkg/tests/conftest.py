import math

import numpy as np
import pytest

from gilbert.engine import MarkedConfig


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


def random_config(rng, m=None, side=10.0, m_lo=2, m_hi=12):
    """Uniform seeds with uniform marks on a square window."""
    if m is None:
        m = int(rng.integers(m_lo, m_hi + 1))
    xs = rng.uniform(0.0, side, m)
    ys = rng.uniform(0.0, side, m)
    alphas = rng.uniform(0.0, math.pi, m)
    return MarkedConfig.from_arrays(xs, ys, alphas)
