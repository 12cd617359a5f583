import numpy as np
import pytest

from cpfif.analysis import DATASETS, canonical_dataset, reference_spline


@pytest.fixture(params=DATASETS)
def dataset_name(request):
    return request.param


@pytest.fixture
def data(dataset_name):
    return canonical_dataset(dataset_name)


@pytest.fixture
def spline(data):
    return reference_spline(data)


@pytest.fixture
def high():
    return canonical_dataset("high_curvature")


@pytest.fixture
def high_spline(high):
    return reference_spline(high)


@pytest.fixture
def low():
    return canonical_dataset("low_curvature")


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
