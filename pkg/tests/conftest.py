import numpy as np
import pytest

from nmr import Dictionary


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_dictionary(rng, n=4, p=5, q=4, n_classes=2):
    labels = [i % n_classes for i in range(n)]
    return Dictionary(rng.standard_normal((n, p, q)), labels)


@pytest.fixture
def small_dict(rng):
    return random_dictionary(rng)
