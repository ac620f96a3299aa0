"""Statistical helpers for Monte Carlo error estimates."""
import logging

import numpy as np
from scipy import stats

LGR = logging.getLogger(__name__)


def wilson_interval(successes, total, confidence=0.95):
    """Wilson score interval for a binomial proportion.

    Parameters
    ----------
    successes : :obj:`int`
        Number of counted outcomes (errors, for an error probability).
    total : :obj:`int`
        Number of trials. Must be positive.
    confidence : :obj:`float`, optional
        Two-sided confidence level. Default is 0.95.

    Returns
    -------
    low, high : :obj:`float`
        Interval bounds, clipped to [0, 1].

    Notes
    -----
    The interval is centered on the shrunk estimate
    :math:`(\\hat{p} + z^2 / 2n) / (1 + z^2 / n)`, so it never collapses to a point at
    :math:`\\hat{p} \\in \\{0, 1\\}`. When ``successes`` is 0 the lower bound is exactly 0.
    """
    if total <= 0:
        raise ValueError(f"total must be positive, not {total}")
    if not 0 <= successes <= total:
        raise ValueError(f"successes must lie in [0, {total}], not {successes}")
    if not 0 < confidence < 1:
        raise ValueError(f"confidence must lie in (0, 1), not {confidence}")

    z = stats.norm.ppf(0.5 + confidence / 2)
    p_hat = successes / total
    denominator = 1 + z**2 / total
    center = (p_hat + z**2 / (2 * total)) / denominator
    spread = z * np.sqrt(p_hat * (1 - p_hat) / total + z**2 / (4 * total**2)) / denominator

    low = 0.0 if successes == 0 else max(0.0, center - spread)
    high = 1.0 if successes == total else min(1.0, center + spread)
    return low, high


def sign_test(wins, n):
    """One-sided sign test that wins outnumber losses.

    Parameters
    ----------
    wins : :obj:`int`
        Number of paired comparisons won by the first method.
    n : :obj:`int`
        Number of non-tied paired comparisons.

    Returns
    -------
    p : :obj:`float`
        P-value of observing at least ``wins`` wins under a fair coin.
    """
    if n == 0:
        return 1.0
    return stats.binomtest(int(wins), int(n), p=0.5, alternative="greater").pvalue
