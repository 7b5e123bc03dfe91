import numpy as np
import pytest

from crystalline.builtins import builtin_pair
from crystalline.dirichlet import FrequencyVec, ZeroList
from crystalline.measure import CrystallineMeasure


def measure_from_points(points, window=None, pair_name="poisson"):
    """Hand-built measure with unit weights, for analysis tests."""
    x = np.sort(np.asarray(points, dtype=float))
    if window is None:
        window = (float(x.min()) - 1, float(x.max()) + 1) if len(x) else (-1.0, 1.0)
    zeros = ZeroList(x, np.ones(len(x), dtype=int), window, np.zeros(len(x)), np.ones(len(x)))
    return CrystallineMeasure(zeros, builtin_pair(pair_name), FrequencyVec((1.0,)))


@pytest.fixture
def lasso():
    return builtin_pair("lasso")


@pytest.fixture
def poisson():
    return builtin_pair("poisson")
