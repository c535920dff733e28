import numpy as np
import pytest

from vortexcg.torus import GridSpec


def band_limited(n, cutoff=3, seed=0, zero_mean=True, amplitude=1.0):
    """Random real field with modes max(|k1|,|k2|) <= cutoff, built by direct summation."""
    rng = np.random.default_rng(seed)
    grid = GridSpec(n)
    x1, x2 = grid.nodes[..., 0], grid.nodes[..., 1]
    f = np.zeros((n, n))
    for a in range(-cutoff, cutoff + 1):
        for b in range(-cutoff, cutoff + 1):
            if zero_mean and a == 0 and b == 0:
                continue
            c, s = rng.standard_normal(2)
            f += c * np.cos(a * x1 + b * x2) + s * np.sin(a * x1 + b * x2)
    if zero_mean:
        f -= f.mean()
    return amplitude * f / np.sqrt(np.mean(f**2))


@pytest.fixture
def grid16():
    return GridSpec(16)


@pytest.fixture
def grid32():
    return GridSpec(32)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
