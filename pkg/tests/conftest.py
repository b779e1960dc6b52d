import numpy as np
import pytest

from smallprint import Image
from smallprint.image import smooth_array


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def smooth_random_image(rng, shape=(64, 64), sigma=2.0):
    """A smooth random test image with healthy gradients everywhere."""
    arr = smooth_array(rng.random(shape), sigma)
    lo, hi = arr.min(), arr.max()
    return Image((arr - lo) / (hi - lo))
