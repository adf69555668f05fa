import numpy as np
import pytest

from fibred_flower.rotation import RotationNumber
from fibred_flower.trigpoly import TrigPoly


@pytest.fixture
def golden():
    return RotationNumber.golden()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_trig(rng, degree=3, mean_zero=False, scale=1.0):
    modes = {n: scale * complex(*rng.normal(size=2)) for n in range(-degree, degree + 1)}
    if mean_zero:
        modes[0] = 0j
    return TrigPoly.from_modes(modes)
