import numpy as np
import pytest

from costboost.costs import CostMatrix, extend_cost_matrix, make_01_cost
from costboost.dataset import Dataset


def gaussian_blobs(rng, n, means, scale=1.0, k=None):
    """Balanced Gaussian mixture dataset with one blob per class."""
    k = k or len(means)
    labels = rng.integers(1, len(means) + 1, size=n)
    centers = np.array([means[l - 1] for l in labels], dtype=np.float64)
    features = centers + scale * rng.normal(size=centers.shape)
    names = [f"x{i + 1}" for i in range(features.shape[1])]
    return Dataset(feature_names=names, features=features, labels=labels, k=k)


@pytest.fixture
def three_blobs():
    rng = np.random.default_rng(42)
    return gaussian_blobs(rng, 600, [(0.0, 0.0), (2.5, 0.0), (0.0, 2.5)])


@pytest.fixture
def asymmetric_cost():
    return CostMatrix([[0.0, 1.0, 2.0], [3.0, 0.0, 1.0], [1.0, 2.0, 0.0]])


def unit_multipliers(cost):
    """Multiplier table at unit step for a cost matrix."""
    ext = extend_cost_matrix(cost)
    return ext.a


def samme_cost(k):
    return make_01_cost(k, 1.0 / (k * (k - 1)))
