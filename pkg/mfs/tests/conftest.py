"""Generate fixtures for tests."""
import json
import os

import numpy as np
import pytest

from mfs.mmpp import TwoStateMmpp
from mfs.spectral import MvlFunction
from mfs.utils import get_resource_path


@pytest.fixture(scope="session")
def dense_components():
    """Traffic dense enough that every sensor reports in every 5 second epoch."""
    return (TwoStateMmpp(delta12=1.0, delta21=1.0, r1=4.0, r2=6.0),)


@pytest.fixture(scope="session")
def ternary_functions():
    """Random ternary functions of one and two inputs."""
    rng = np.random.default_rng(20)
    functions = []
    for n in (1, 2):
        for _ in range(5):
            functions.append(MvlFunction(g=3, n=n, table=rng.integers(0, 3, size=3**n)))
    return functions


@pytest.fixture(scope="session")
def bundled_config():
    """Load a bundled configuration by name."""

    def _load(name):
        with open(os.path.join(get_resource_path(), f"{name}.json")) as file_object:
            return json.load(file_object)

    return _load
