import mpmath
import numpy as np
import pytest

mpmath.mp.dps = 40


def mp_cdf(z):
    """High-precision Phi used as an independent oracle."""
    return float(mpmath.ncdf(mpmath.mpf(z)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
