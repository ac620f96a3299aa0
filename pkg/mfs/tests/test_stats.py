"""Test mfs.stats."""
import math

import pytest

from mfs import stats


@pytest.mark.parametrize(
    "successes,total",
    [
        pytest.param(0, 10, id="none"),
        pytest.param(3, 10, id="some"),
        pytest.param(10, 10, id="all"),
        pytest.param(512, 10000, id="large"),
    ],
)
def test_wilson_interval_contains_estimate(successes, total):
    """The interval lies in [0, 1] and contains the observed proportion."""
    low, high = stats.wilson_interval(successes, total)
    assert 0 <= low <= successes / total <= high <= 1
    assert low < high


def test_wilson_interval_values():
    """Check the interval against its closed form."""
    low, high = stats.wilson_interval(5, 20)
    z = 1.959963984540054
    center = (0.25 + z**2 / 40) / (1 + z**2 / 20)
    spread = z * math.sqrt(0.25 * 0.75 / 20 + z**2 / 1600) / (1 + z**2 / 20)
    assert math.isclose(low, center - spread, rel_tol=1e-9)
    assert math.isclose(high, center + spread, rel_tol=1e-9)

    assert stats.wilson_interval(0, 100)[0] == 0.0
    narrow = stats.wilson_interval(50, 1000)
    wide = stats.wilson_interval(5, 100)
    assert narrow[1] - narrow[0] < wide[1] - wide[0]


def test_wilson_interval_errors():
    """Check argument checks."""
    with pytest.raises(ValueError):
        stats.wilson_interval(1, 0)
    with pytest.raises(ValueError):
        stats.wilson_interval(5, 4)
    with pytest.raises(ValueError):
        stats.wilson_interval(1, 4, confidence=1.0)


def test_sign_test():
    """Check one-sided sign test p-values."""
    assert stats.sign_test(0, 0) == 1.0
    assert math.isclose(stats.sign_test(20, 20), 0.5**20)
    assert math.isclose(stats.sign_test(0, 3), 1.0)
    assert stats.sign_test(15, 20) < 0.05
