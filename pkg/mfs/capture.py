"""Context capture at the fusion center.

The fusion center grants a reception budget per slot of width ``slot_width``. A capture
model predicts the arrival rate of the next slot, and the budget is
``max(min_budget, ceil(budget_factor * rate * slot_width))``. The earliest events of the
slot are received, up to the budget, and later events are missed.
"""
import logging
from abc import abstractmethod
from functools import lru_cache

import numpy as np
import pandas as pd
from scipy import linalg, special

from mfs.base import MFSBase
from mfs.mmpp import SuperposedMmpp, steady_state
from mfs.traffic import bin_trace, slot_index

LGR = logging.getLogger(__name__)

REPORT_COLUMNS = ["slot", "budget", "arrivals", "captured", "belief_top_state"]


@lru_cache(maxsize=64)
def _slot_transition(model, slot_width):
    """Slot transition matrix ``expm(G * slot_width)``, clipped to nonnegative entries."""
    return np.clip(linalg.expm(model.generator * slot_width), 0, None)


class CaptureModel(MFSBase):
    """Base class for capture models.

    Parameters
    ----------
    slot_width : :obj:`float`, optional
        Width of a reception slot. Default is 5.
    budget_factor : :obj:`float`, optional
        Multiplier ``c`` applied to the expected number of arrivals. Default is 2.
    min_budget : :obj:`int`, optional
        Budget granted in every slot whatever the prediction. Default is 0.
    """

    kind = None

    def __init__(self, slot_width=5.0, budget_factor=2.0, min_budget=0):
        if not slot_width > 0:
            raise ValueError(f"slot_width must be positive, not {slot_width}")
        if not budget_factor > 0:
            raise ValueError(f"budget_factor must be positive, not {budget_factor}")
        if min_budget < 0:
            raise ValueError(f"min_budget must be nonnegative, not {min_budget}")
        self.slot_width = slot_width
        self.budget_factor = budget_factor
        self.min_budget = min_budget

    @abstractmethod
    def expected_rate(self):
        """Predicted arrival rate for the coming slot."""

    def reset(self):
        """Forget everything observed so far."""
        return self

    def observe(self, count):
        """Account for the number of arrivals in the slot that just ended."""
        return self

    def top_state(self):
        """Most probable superposed state (1-based), if the model tracks one."""
        return None

    def budget(self):
        """Number of events that can be received in the coming slot."""
        expected = self.budget_factor * self.expected_rate() * self.slot_width
        return max(int(self.min_budget), int(np.ceil(np.round(expected, 9))))


class PoissonCapture(CaptureModel):
    """Constant budget derived from a mean arrival rate.

    Parameters
    ----------
    mean_rate : :obj:`float`
        Long-run arrival rate of all sensors together.
    slot_width : :obj:`float`, optional
    budget_factor : :obj:`float`, optional
    min_budget : :obj:`int`, optional
    """

    kind = "poisson"

    def __init__(self, mean_rate, slot_width=5.0, budget_factor=2.0, min_budget=0):
        super().__init__(slot_width=slot_width, budget_factor=budget_factor, min_budget=min_budget)
        if mean_rate < 0:
            raise ValueError(f"mean_rate must be nonnegative, not {mean_rate}")
        self.mean_rate = mean_rate

    def expected_rate(self):
        return self.mean_rate


class MMPPCapture(CaptureModel):
    """Budget driven by a forward filter over the superposed-MMPP state.

    After each slot the belief over superposed states is propagated with
    ``P = expm(G * slot_width)`` and weighted by the Poisson likelihood of the slot's
    arrival count. The budget of the next slot uses the predicted rate
    ``(belief @ P) @ rates``.

    Parameters
    ----------
    model : :class:`~mfs.mmpp.SuperposedMmpp`
        Arrival model of all sensors together.
    slot_width : :obj:`float`, optional
    budget_factor : :obj:`float`, optional
    min_budget : :obj:`int`, optional
        Floor under every budget. A fusion center provisioned with the constant
        poisson budget passes it here and only grows the budget when a burst is predicted.

    Attributes
    ----------
    belief_ : :class:`numpy.ndarray`
        Filtered distribution over superposed states at the end of the last observed slot.
    predicted_ : :class:`numpy.ndarray`
        Distribution over superposed states one slot ahead.
    """

    kind = "mmpp"

    def __init__(self, model, slot_width=5.0, budget_factor=2.0, min_budget=0):
        super().__init__(slot_width=slot_width, budget_factor=budget_factor, min_budget=min_budget)
        if not isinstance(model, SuperposedMmpp):
            raise ValueError(f"model must be a SuperposedMmpp, not {type(model)}")
        self.model = model
        self.reset()

    @property
    def transition_(self):
        """:class:`numpy.ndarray`: Slot transition matrix."""
        return _slot_transition(self.model, float(self.slot_width))

    def reset(self):
        self.prior_ = np.clip(steady_state(self.model), 0, None)
        self.prior_ /= self.prior_.sum()
        self.belief_ = self.prior_.copy()
        self.predicted_ = self.belief_ @ self.transition_
        return self

    def expected_rate(self):
        return float(self.predicted_ @ self.model.rates)

    def top_state(self):
        return int(np.argmax(self.predicted_)) + 1

    def filter_update(self, count):
        """Update the belief with the arrival count of one slot.

        Parameters
        ----------
        count : :obj:`int`
            Number of arrivals observed in the slot.

        Returns
        -------
        self
        """
        if count < 0:
            raise ValueError(f"Observed count must be nonnegative, not {count}")

        mean_counts = self.model.rates * self.slot_width
        log_lik = special.xlogy(count, mean_counts) - mean_counts
        posterior = np.zeros_like(self.predicted_)
        if np.any(np.isfinite(log_lik)):
            posterior = self.predicted_ * np.exp(log_lik - np.max(log_lik))

        total = posterior.sum()
        if not (np.isfinite(total) and total > 0):
            LGR.warning(
                f"A count of {count} is impossible under every state of the model. "
                "Resetting the belief to the steady state."
            )
            self.belief_ = self.prior_.copy()
        else:
            self.belief_ = posterior / total

        self.predicted_ = np.clip(self.belief_ @ self.transition_, 0, None)
        self.predicted_ /= self.predicted_.sum()
        return self

    def observe(self, count):
        return self.filter_update(count)


CAPTURE_KINDS = {"poisson": PoissonCapture, "mmpp": MMPPCapture}


def allocate_budgets(counts, model):
    """Budget and top state of every slot, given the per-slot arrival counts.

    The model is reset first. The budget of slot ``s`` only depends on counts before ``s``.

    Parameters
    ----------
    counts : array_like of :obj:`int`
        Arrivals per slot.
    model : :class:`CaptureModel`

    Returns
    -------
    budgets : :class:`numpy.ndarray`
    top_states : :obj:`list`
        1-based most probable state per slot, or None for models without a state.
    """
    model.reset()
    counts = np.asarray(counts, dtype=int)
    if isinstance(model, PoissonCapture):
        return np.full(counts.size, model.budget(), dtype=int), [None] * counts.size

    budgets = np.empty(counts.size, dtype=int)
    top_states = []
    for slot, count in enumerate(counts):
        budgets[slot] = model.budget()
        top_states.append(model.top_state())
        model.observe(count)
    return budgets, top_states


def capture_mask(times, slot_width, budgets):
    """Mark the events received under per-slot budgets.

    Parameters
    ----------
    times : (n_events,) array_like
        Event times in nondecreasing order.
    slot_width : :obj:`float`
    budgets : (n_slots,) array_like of :obj:`int`

    Returns
    -------
    mask : :class:`numpy.ndarray` of :obj:`bool`
        True for the first ``budgets[s]`` events of each slot ``s``.
    """
    budgets = np.asarray(budgets)
    slots = slot_index(times, slot_width, budgets.size)
    rank = np.arange(slots.size) - np.searchsorted(slots, slots, side="left")
    return rank < budgets[slots]


def _run(trace, model):
    counts = bin_trace(trace, model.slot_width).counts
    budgets, top_states = allocate_budgets(counts, model)
    mask = capture_mask(trace.times, model.slot_width, budgets)
    return counts, budgets, top_states, mask


def run_capture(trace, model):
    """Receive a trace under a capture model.

    Parameters
    ----------
    trace : :class:`~mfs.traffic.Trace`
    model : :class:`CaptureModel`

    Returns
    -------
    captured : :class:`~mfs.traffic.Trace`
    missed : :class:`~mfs.traffic.Trace`
    ratio : :obj:`float`
        Fraction of events captured, 1 for an empty trace.
    """
    _, _, _, mask = _run(trace, model)
    ratio = float(mask.mean()) if len(trace) else 1.0
    return trace.select(mask), trace.select(~mask), ratio


def capture_report(trace, model):
    """Per-slot report of a capture run.

    Returns
    -------
    :class:`pandas.DataFrame`
        Columns ``slot``, ``budget``, ``arrivals``, ``captured`` and ``belief_top_state``.
    """
    counts, budgets, top_states, mask = _run(trace, model)
    slots = slot_index(trace.times, model.slot_width, counts.size)
    captured = np.bincount(slots[mask], minlength=counts.size)
    report = pd.DataFrame(
        {
            "slot": np.arange(counts.size),
            "budget": budgets,
            "arrivals": counts,
            "captured": captured,
            "belief_top_state": pd.array(top_states, dtype="Int64"),
        },
        columns=REPORT_COLUMNS,
    )
    return report
