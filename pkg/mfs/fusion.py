"""Multi-valued local decisions and fault-tolerant likelihood fusion.

Hypothesis ``H_i`` emits the signal level ``levels[i]`` plus zero-mean Gaussian noise. Each
sensor reports the MAP decision over the hypotheses. The fusion center combines reports
with log-likelihood ratios against the last hypothesis ``H_(g-1)``.

Decisions are passed around as ``(sensor_id, value)`` pairs. Ties are always broken toward
the lowest index.
"""
import logging
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from mfs.base import MFSBase

LGR = logging.getLogger(__name__)

PROB_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class HypothesisModel:
    """Priors, signal levels and noise of the observation model.

    Parameters
    ----------
    priors : array_like
        Prior probability of each hypothesis.
    sigma : :obj:`float`
        Observation noise standard deviation.
    levels : array_like, optional
        Strictly increasing signal level of each hypothesis. Default is ``0..g-1``.
    """

    priors: np.ndarray
    sigma: float
    levels: np.ndarray = field(default=None)

    def __post_init__(self):
        priors = np.asarray(self.priors, dtype=float).ravel()
        levels = (
            np.arange(priors.size, dtype=float)
            if self.levels is None
            else np.asarray(self.levels, dtype=float).ravel()
        )
        if priors.size < 2:
            raise ValueError(f"At least two hypotheses are required, not {priors.size}")
        if levels.size != priors.size:
            raise ValueError(f"Got {priors.size} priors but {levels.size} levels")
        if np.any(priors < 0) or not np.isclose(priors.sum(), 1):
            raise ValueError(f"Priors must be nonnegative and sum to 1, not {priors}")
        if np.any(np.diff(levels) <= 0):
            raise ValueError(f"Levels must be strictly increasing, not {levels}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, not {self.sigma}")
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "levels", levels)

    @classmethod
    def uniform(cls, g, sigma):
        """Model with ``g`` equally likely hypotheses at levels ``0..g-1``."""
        return cls(priors=np.full(g, 1 / g), sigma=sigma)

    @property
    def g(self):
        """:obj:`int`: Number of hypotheses."""
        return self.priors.size


@dataclass
class SensorState:
    """Runtime fault bookkeeping of one sensor.

    Parameters
    ----------
    sensor_id : :obj:`int`
    window : :obj:`int`
        Number of recent decisions kept.
    fault_flag : :obj:`bool`
        Whether the sensor has been declared stuck. Flags are never cleared.
    injected_fault : :obj:`int` or None
        Stuck value injected by an experiment, or None for a healthy sensor.
    """

    sensor_id: int
    window: int = 50
    fault_flag: bool = False
    injected_fault: int = None
    decision_history: deque = field(default=None, repr=False)

    def __post_init__(self):
        if self.decision_history is None:
            self.decision_history = deque(maxlen=self.window)

    def record(self, value):
        """Append one reported decision to the history."""
        self.decision_history.append(int(value))


def sigma_from_osnr(osnr_db, levels, priors):
    """Noise standard deviation giving an observation SNR of ``osnr_db`` decibels.

    ``sigma = sqrt(P / 10^(osnr_db / 10))`` with mean signal power
    ``P = sum_i priors_i * levels_i^2``.
    """
    if np.isnan(osnr_db):
        raise ValueError("osnr_db must not be NaN")
    power = float(np.sum(np.asarray(priors) * np.asarray(levels, dtype=float) ** 2))
    return float(np.sqrt(power / 10 ** (osnr_db / 10)))


def decision_bounds(model):
    """Decision region of every hypothesis under the MAP rule.

    Log-posteriors are linear in the observation with increasing slopes, so every region
    is an interval ``(low_i, high_i]``. The interval is empty when ``low_i >= high_i``.

    Returns
    -------
    low, high : :class:`numpy.ndarray`
    """
    slopes = model.levels / model.sigma**2
    with np.errstate(divide="ignore"):
        intercepts = np.log(model.priors) - model.levels**2 / (2 * model.sigma**2)

    g = model.g
    low = np.full(g, -np.inf)
    high = np.full(g, np.inf)
    for i in range(g):
        for j in range(g):
            if j == i:
                continue
            with np.errstate(invalid="ignore"):
                crossing = (intercepts[j] - intercepts[i]) / (slopes[i] - slopes[j])
            if np.isnan(crossing):
                crossing = np.inf if intercepts[i] == -np.inf else -np.inf
            if j < i:
                low[i] = max(low[i], crossing)
            else:
                high[i] = min(high[i], crossing)
    return low, high


def confusion_matrix(model):
    """Probabilities of each local decision under each hypothesis.

    Parameters
    ----------
    model : :class:`HypothesisModel`

    Returns
    -------
    (g, g) :class:`numpy.ndarray`
        Entry ``(i, j)`` is the probability that an observation under ``H_i`` falls in the
        decision region of ``j``.
    """
    low, high = decision_bounds(model)
    nonempty = low < high
    upper = stats.norm.cdf((high[None, :] - model.levels[:, None]) / model.sigma)
    lower = stats.norm.cdf((low[None, :] - model.levels[:, None]) / model.sigma)
    confusion = np.where(nonempty[None, :], upper - lower, 0.0)
    return confusion / confusion.sum(axis=1, keepdims=True)


def binary_confusion(model, threshold=None):
    """Confusion of a binary quantizer for the two extreme hypotheses.

    A sensor reports 1 when its observation exceeds ``threshold`` and 0 otherwise.

    Parameters
    ----------
    model : :class:`HypothesisModel`
    threshold : :obj:`float`, optional
        Default is the midpoint between the lowest and highest level.

    Returns
    -------
    (2, 2) :class:`numpy.ndarray`
        Rows are ``H_0`` and ``H_(g-1)``; columns are the reported bits.
    """
    if threshold is None:
        threshold = (model.levels[0] + model.levels[-1]) / 2
    extremes = model.levels[[0, -1]]
    p_one = stats.norm.sf((threshold - extremes) / model.sigma)
    return np.column_stack([1 - p_one, p_one])


def local_decide(observation, model):
    """MAP local decision for one or more observations.

    Parameters
    ----------
    observation : :obj:`float` or array_like
    model : :class:`HypothesisModel`

    Returns
    -------
    :obj:`int` or :class:`numpy.ndarray`
        ``argmax_i priors_i * N(observation; levels_i, sigma)``, ties to the lowest index.
    """
    observation = np.asarray(observation, dtype=float)
    if not np.all(np.isfinite(observation)):
        raise ValueError("Observations must be finite.")

    with np.errstate(divide="ignore"):
        log_prior = np.log(model.priors)
    scores = log_prior - (observation[..., None] - model.levels) ** 2 / (2 * model.sigma**2)
    decision = np.argmax(scores, axis=-1)
    return int(decision) if decision.ndim == 0 else decision


def _as_decisions(decisions):
    decisions = np.asarray(decisions, dtype=int)
    if decisions.size == 0:
        return np.empty(0, dtype=int), np.empty(0, dtype=int)
    decisions = decisions.reshape(-1, 2)
    return decisions[:, 0], decisions[:, 1]


def _log_confusions(confusions, sensor_ids, values):
    """Log of ``C_d(i, v_d)`` for every decision ``d`` and hypothesis ``i``, floored."""
    confusions = np.asarray(confusions, dtype=float)
    if confusions.ndim == 2:
        probs = confusions[:, values].T
    else:
        probs = confusions[sensor_ids, :, values]

    if np.any(probs < PROB_FLOOR):
        LGR.debug(f"Flooring {np.sum(probs < PROB_FLOOR)} conditional probabilities.")
        probs = np.maximum(probs, PROB_FLOOR)
    return np.log(probs)


def log_likelihoods(decisions, confusions, priors):
    """Log-likelihood ratios of every hypothesis against the last one.

    Parameters
    ----------
    decisions : array_like
        ``(sensor_id, value)`` pairs.
    confusions : (g, g) or (n_sensors, g, g) array_like
        A confusion matrix shared by all sensors, or one per sensor id.
    priors : array_like
        Hypothesis priors.

    Returns
    -------
    L : :class:`numpy.ndarray`
        ``L_i = log(p_i / p_(g-1)) + sum_d log(C_d(i, v_d) / C_d(g-1, v_d))``, so that
        ``L[-1]`` is 0.
    """
    sensor_ids, values = _as_decisions(decisions)
    priors = np.maximum(np.asarray(priors, dtype=float), PROB_FLOOR)
    totals = np.log(priors)
    if values.size:
        totals = totals + _log_confusions(confusions, sensor_ids, values).sum(axis=0)
    return totals - totals[-1]


def log_likelihood(decisions, confusions, priors, i):
    """Log-likelihood ratio ``L_i`` of hypothesis ``i`` against the last hypothesis."""
    priors = np.asarray(priors)
    if not 0 <= i < priors.size:
        raise ValueError(f"Hypothesis index must lie in [0, {priors.size - 1}], not {i}")
    return float(log_likelihoods(decisions, confusions, priors)[i])


def posterior(decisions, confusions, priors):
    """Posterior probability of every hypothesis given the decisions."""
    log_post = log_likelihoods(decisions, confusions, priors)
    weights = np.exp(log_post - log_post.max())
    return weights / weights.sum()


def global_fuse(decisions, confusions, priors):
    """Minimum error probability fusion of local decisions.

    Returns
    -------
    z : :obj:`int`
        ``g-1`` when every ``L_i`` (``i < g-1``) is negative, otherwise the lowest-index
        argmax of ``L_i`` over ``i < g-1``.
    """
    ratios = log_likelihoods(decisions, confusions, priors)
    head = ratios[:-1]
    if np.all(head < 0):
        return ratios.size - 1
    return int(np.argmax(head))


def fuse_fault_tolerant(decisions, flags, confusions, priors):
    """Fuse only the decisions of sensors not flagged as faulty.

    Parameters
    ----------
    decisions : array_like
        ``(sensor_id, value)`` pairs.
    flags : array_like of :obj:`bool`
        Fault flag indexed by sensor id.
    confusions, priors
        See :func:`global_fuse`.

    Returns
    -------
    z : :obj:`int`
        The lowest-index prior argmax when no sensor is left.
    """
    flags = np.asarray(flags, dtype=bool)
    sensor_ids, values = _as_decisions(decisions)
    if flags.size and flags.all():
        return int(np.argmax(priors))

    keep = ~flags[sensor_ids] if flags.size else np.ones(sensor_ids.size, dtype=bool)
    return global_fuse(np.column_stack([sensor_ids[keep], values[keep]]), confusions, priors)


def majority_decision(values, g):
    """Most frequent decision value, ties to the lowest, or None when there are none."""
    values = np.asarray(values, dtype=int)
    if values.size == 0:
        return None
    return int(np.argmax(np.bincount(values, minlength=g)))


def _count_changes(sequence):
    items = list(sequence)
    return sum(a != b for a, b in zip(items[:-1], items[1:]))


def detect_stuck(states, majority_history, window, min_variation):
    """Flag sensors whose recent decisions are frozen while the ensemble moves.

    A sensor is flagged when its last ``window`` decisions are all equal and the
    per-epoch majority changed at least ``min_variation`` times over the last ``window``
    epochs. Flags are sticky.

    Parameters
    ----------
    states : :obj:`list` of :class:`SensorState`
        Updated in place.
    majority_history : sequence of :obj:`int`
        Per-epoch majority decisions of non-flagged sensors, oldest first.
    window : :obj:`int`
        W, at least 2.
    min_variation : :obj:`int`
        V, at least 1.

    Returns
    -------
    flags : :class:`numpy.ndarray` of :obj:`bool`
        Updated flags, in the order of ``states``.
    """
    if window < 2:
        raise ValueError(f"window must be at least 2, not {window}")
    if min_variation < 1:
        raise ValueError(f"min_variation must be at least 1, not {min_variation}")

    recent_majority = list(majority_history)[-window:]
    ensemble_moves = _count_changes(recent_majority) >= min_variation
    for state in states:
        if state.fault_flag or not ensemble_moves:
            continue
        history = list(state.decision_history)[-window:]
        if len(history) == window and len(set(history)) == 1:
            LGR.debug(f"Sensor {state.sensor_id} flagged as stuck at {history[0]}.")
            state.fault_flag = True
    return np.array([state.fault_flag for state in states], dtype=bool)


class StuckDetector(MFSBase):
    """Epoch-by-epoch stuck-sensor detection over a sensor ensemble.

    Parameters
    ----------
    n_sensors : :obj:`int`
        Sensors are identified by 0..n_sensors-1.
    g : :obj:`int`
        Radix of the decisions.
    window : :obj:`int`, optional
        W. Default is 50.
    min_variation : :obj:`int`, optional
        V. Default is 5.
    """

    def __init__(self, n_sensors, g, window=50, min_variation=5):
        self.n_sensors = n_sensors
        self.g = g
        self.window = window
        self.min_variation = min_variation
        self.states_ = [SensorState(sensor_id, window=window) for sensor_id in range(n_sensors)]
        self.majority_ = deque(maxlen=window)

    @property
    def flags_(self):
        """:class:`numpy.ndarray` of :obj:`bool`: Current fault flags by sensor id."""
        return np.array([state.fault_flag for state in self.states_], dtype=bool)

    def update(self, sensor_ids, values):
        """Record one epoch of decisions and refresh the flags.

        Parameters
        ----------
        sensor_ids, values : array_like of :obj:`int`
            Decisions received in the epoch, in arrival order.

        Returns
        -------
        flags : :class:`numpy.ndarray` of :obj:`bool`
        """
        sensor_ids = np.asarray(sensor_ids, dtype=int)
        values = np.asarray(values, dtype=int)
        flags = self.flags_
        majority = majority_decision(values[~flags[sensor_ids]], self.g)
        if majority is not None:
            self.majority_.append(majority)

        for sensor_id, value in zip(sensor_ids, values):
            self.states_[sensor_id].record(value)

        return detect_stuck(self.states_, self.majority_, self.window, self.min_variation)
