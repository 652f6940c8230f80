import numpy as np
import pytest


def random_disk(rng, n, radius, dim=2):
    """``n`` points with uniform directions and norms uniform in ``[0, radius)``."""
    x = rng.standard_normal((n, dim))
    x /= np.linalg.norm(x, axis=1)[:, None]
    return x * (radius * rng.random(n))[:, None]


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)
