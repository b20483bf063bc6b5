import numpy as np
import pytest


class ScriptedRng:
    """Stand-in for ``np.random.Generator`` that replays fixed ``integers`` draws."""

    def __init__(self, values):
        self.values = list(values)

    def integers(self, low, high=None, *args, **kwargs):
        v = self.values.pop(0)
        assert low <= v < high, (low, v, high)
        return v


@pytest.fixture
def scripted():
    return ScriptedRng


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
