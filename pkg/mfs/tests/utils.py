"""Utility functions for testing mfs."""
import logging
import os.path as op
from contextlib import ExitStack as does_not_raise  # noqa: F401

import numpy as np

from mfs.mmpp import TwoStateMmpp

LGR = logging.getLogger(__name__)


def get_test_data_path():
    """Return the path to test datasets, terminated with separator.

    Test-related data are kept in tests folder in "data".
    """
    return op.abspath(op.join(op.dirname(__file__), "data") + op.sep)


def random_components(rng, n_components):
    """Draw two-state MMPPs with distinct switching rates."""
    components = []
    for _ in range(n_components):
        delta12, delta21 = rng.uniform(0.1, 2.0, size=2)
        r1, r2 = rng.uniform(0.0, 5.0, size=2)
        components.append(TwoStateMmpp(delta12, delta21, r1, r2))
    return components


def read_output(filename):
    """Split an output file into its header line, CSV body and summary entries."""
    with open(filename) as file_object:
        lines = file_object.read().splitlines()

    header = lines[0]
    body = [line for line in lines[1:] if not line.startswith("#")]
    summary = dict(
        line[2:].split("=", 1) for line in lines[1:] if line.startswith("# ") and "=" in line
    )
    return header, body, summary


def as_array(lines):
    """Parse numeric CSV body lines, header excluded."""
    return np.array([[float(x) for x in line.split(",")] for line in lines[1:]])
