"""Generation of time-stamped local-decision traffic."""
import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import pandas as pd

from mfs.mmpp import TwoStateMmpp, _cumulative_intensity, steady_state
from mfs.utils import check_random_state

LGR = logging.getLogger(__name__)

TRACE_COLUMNS = ["time", "sensor_id", "value"]


class DecisionEvent(NamedTuple):
    """A single local decision received from an identified sensor."""

    time: float
    sensor_id: int
    value: int


@dataclass(frozen=True)
class OnOffSource:
    """Interrupted Poisson source of local decisions.

    Parameters
    ----------
    tau : :obj:`float`
        Mean on-duration and mean off-duration.
    rate : :obj:`float`
        Poisson decision rate while on.
    sensor_id : :obj:`int`, optional
        Identifier stamped on every event. Default is 1.
    g : :obj:`int`, optional
        Radix of the decision values. Default is 2.
    """

    tau: float
    rate: float
    sensor_id: int = 1
    g: int = 2

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, not {self.tau}")
        if self.rate < 0:
            raise ValueError(f"rate must be nonnegative, not {self.rate}")
        if self.g < 2:
            raise ValueError(f"g must be at least 2, not {self.g}")

    def to_mmpp(self):
        """Return the equivalent :class:`~mfs.mmpp.TwoStateMmpp` (state 1 off, state 2 on)."""
        return TwoStateMmpp.from_onoff(self.tau, self.rate)


class Trace:
    """Time-sorted sequence of decision events over [0, horizon).

    Events are stored column-wise. They are sorted by time, ties by sensor id, and remaining
    ties keep their input order.

    Parameters
    ----------
    times, sensor_ids, values : array_like
        Event columns of equal length.
    horizon : :obj:`float`
        End of the observation window.
    """

    def __init__(self, times=(), sensor_ids=(), values=(), horizon=0.0):
        times = np.asarray(times, dtype=float).ravel()
        sensor_ids = np.asarray(sensor_ids, dtype=int).ravel()
        values = np.asarray(values, dtype=int).ravel()
        if not times.size == sensor_ids.size == values.size:
            raise ValueError(
                f"Event columns differ in length: {times.size} times, "
                f"{sensor_ids.size} sensor ids, {values.size} values"
            )
        if horizon < 0:
            raise ValueError(f"horizon must be nonnegative, not {horizon}")
        if times.size and (times.min() < 0 or times.max() >= horizon):
            raise ValueError(f"Event times must lie in [0, {horizon})")

        order = np.lexsort((np.arange(times.size), sensor_ids, times))
        self.times = times[order]
        self.sensor_ids = sensor_ids[order]
        self.values = values[order]
        self.horizon = float(horizon)

    def __len__(self):
        return self.times.size

    def __iter__(self):
        for time, sensor_id, value in zip(self.times, self.sensor_ids, self.values):
            yield DecisionEvent(float(time), int(sensor_id), int(value))

    def __repr__(self):
        return f"Trace(n_events={len(self)}, horizon={self.horizon})"

    @property
    def events(self):
        """:obj:`list` of :class:`DecisionEvent`: The events in order."""
        return list(self)

    def select(self, mask):
        """Return the sub-trace of events where ``mask`` is True."""
        mask = np.asarray(mask, dtype=bool)
        return Trace(self.times[mask], self.sensor_ids[mask], self.values[mask], self.horizon)

    def to_frame(self):
        """Return the events as a :class:`pandas.DataFrame` with the trace CSV columns."""
        return pd.DataFrame(
            {"time": self.times, "sensor_id": self.sensor_ids, "value": self.values},
            columns=TRACE_COLUMNS,
        )


@dataclass(frozen=True, eq=False)
class CountSeries:
    """Per-slot event counts.

    Parameters
    ----------
    slot_width : :obj:`float`
        Width of each slot.
    counts : :class:`numpy.ndarray`
        Nonnegative integer count per slot.
    """

    slot_width: float
    counts: np.ndarray = field(repr=False)

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=int)
        object.__setattr__(self, "counts", counts)
        if not self.slot_width > 0:
            raise ValueError(f"slot_width must be positive, not {self.slot_width}")
        if np.any(counts < 0):
            raise ValueError("Counts must be nonnegative.")

    def __len__(self):
        return self.counts.size


def _uniform_decisions(g):
    def decide(n, rng):
        return rng.integers(0, g, size=n)

    return decide


def _sojourns(component, horizon, rng):
    """Simulate the modulating chain of a two-state MMPP.

    Returns
    -------
    starts, ends : :class:`numpy.ndarray`
        Sojourn boundaries, clipped to the horizon.
    states : :class:`numpy.ndarray`
        Zero-based state of each sojourn.
    """
    if component.is_ergodic:
        state = int(rng.random() >= steady_state(component)[0])
    else:
        state = 0

    exit_rates = (component.delta12, component.delta21)
    starts, ends, states = [], [], []
    t = 0.0
    while t < horizon:
        rate = exit_rates[state]
        duration = rng.exponential(1 / rate) if rate > 0 else np.inf
        starts.append(t)
        ends.append(min(t + duration, horizon))
        states.append(state)
        t += duration
        state = 1 - state

    return np.array(starts), np.array(ends), np.array(states, dtype=int)


def _emit(rates, starts, ends, sensor_ids, rng):
    """Draw Poisson events for every sensor in every sojourn at the sojourn's rate."""
    lengths = ends - starts
    counts = rng.poisson(np.outer(rates * lengths, np.ones(len(sensor_ids))))
    per_sojourn = counts.sum(axis=1)
    times = np.repeat(starts, per_sojourn) + rng.random(per_sojourn.sum()) * np.repeat(
        lengths, per_sojourn
    )
    ids = np.repeat(np.tile(np.asarray(sensor_ids, dtype=int), len(starts)), counts.ravel())
    return times, ids


def simulate_modulated(
    component,
    sensor_ids,
    horizon,
    seed=None,
    g=2,
    decide=None,
    return_path=False,
):
    """Simulate a group of sensors that share one two-state modulating chain.

    .. versionadded:: 0.1.0

    Parameters
    ----------
    component : :class:`~mfs.mmpp.TwoStateMmpp`
        Per-sensor event rates and switching rates of the shared chain.
    sensor_ids : :obj:`list` of :obj:`int`
        Sensors driven by the chain.
    horizon : :obj:`float`
        End of the simulated window.
    seed : None, :obj:`int` or :class:`numpy.random.Generator`, optional
        Random state.
    g : :obj:`int`, optional
        Radix of the decision values. Default is 2.
    decide : callable, optional
        ``decide(n_events, rng)`` returning decision values. Default draws uniformly over
        0..g-1.
    return_path : :obj:`bool`, optional
        If True, also return the chain's sojourns. Default is False.

    Returns
    -------
    trace : :class:`Trace`
    path : :class:`pandas.DataFrame`
        Columns ``start``, ``end`` and ``state`` (1 or 2). Only returned if ``return_path``.
    """
    if horizon < 0:
        raise ValueError(f"horizon must be nonnegative, not {horizon}")

    rng = check_random_state(seed)
    decide = decide or _uniform_decisions(g)

    starts, ends, states = _sojourns(component, horizon, rng)
    times, ids = _emit(component.rates[states], starts, ends, sensor_ids, rng)
    keep = times < horizon
    times, ids = times[keep], ids[keep]
    values = np.asarray(decide(times.size, rng), dtype=int)
    if values.size and (values.min() < 0 or values.max() >= g):
        raise ValueError(f"Decision values must lie in [0, {g - 1}]")

    trace = Trace(times, ids, values, horizon)
    if return_path:
        path = pd.DataFrame({"start": starts, "end": ends, "state": states + 1})
        return trace, path
    return trace


def simulate_onoff(source, horizon, seed=None, decide=None, return_path=False):
    """Simulate an interrupted Poisson source.

    On and off periods are exponential with mean ``source.tau`` and the initial phase is
    drawn uniformly. Events occur at ``source.rate`` while on.

    Parameters
    ----------
    source : :class:`OnOffSource`
    horizon : :obj:`float`
    seed : None, :obj:`int` or :class:`numpy.random.Generator`, optional
    decide : callable, optional
        See :func:`simulate_modulated`.
    return_path : :obj:`bool`, optional
        If True, also return the on/off sojourns.

    Returns
    -------
    trace : :class:`Trace`
    path : :class:`pandas.DataFrame`
        Only returned if ``return_path``.
    """
    return simulate_modulated(
        source.to_mmpp(),
        [source.sensor_id],
        horizon,
        seed=seed,
        g=source.g,
        decide=decide,
        return_path=return_path,
    )


def simulate_mmpp(model, horizon, seed=None):
    """Simulate arrivals of a superposed MMPP directly from its generator.

    Parameters
    ----------
    model : :class:`~mfs.mmpp.SuperposedMmpp`
    horizon : :obj:`float`
    seed : None, :obj:`int` or :class:`numpy.random.Generator`, optional

    Returns
    -------
    times : :class:`numpy.ndarray`
        Sorted arrival times.
    path : :class:`pandas.DataFrame`
        Columns ``start``, ``end`` and ``state`` (1-based superposed state index).
    """
    if horizon < 0:
        raise ValueError(f"horizon must be nonnegative, not {horizon}")

    rng = check_random_state(seed)
    generator = model.generator
    exit_rates = -np.diag(generator)
    initial = np.clip(steady_state(model), 0, None)
    state = rng.choice(model.n_states, p=initial / initial.sum())

    starts, ends, states = [], [], []
    t = 0.0
    while t < horizon:
        rate = exit_rates[state]
        duration = rng.exponential(1 / rate) if rate > 0 else np.inf
        starts.append(t)
        ends.append(min(t + duration, horizon))
        states.append(state)
        t += duration
        if rate > 0:
            jump = np.clip(generator[state], 0, None)
            jump[state] = 0
            state = rng.choice(model.n_states, p=jump / jump.sum())

    starts, ends, states = np.array(starts), np.array(ends), np.array(states, dtype=int)
    times, _ = _emit(model.rates[states], starts, ends, [0], rng)
    times = np.sort(times[times < horizon])
    path = pd.DataFrame({"start": starts, "end": ends, "state": states + 1})
    return times, path


def simulate_nhpp_counts(profile, slot_width, horizon, seed=None):
    """Per-slot counts of a nonhomogeneous Poisson process.

    Each slot's count is Poisson with mean equal to the integrated rate over the slot. The
    last slot is truncated at the horizon.

    Returns
    -------
    :class:`CountSeries`
    """
    if not slot_width > 0:
        raise ValueError(f"slot_width must be positive, not {slot_width}")
    if horizon < 0:
        raise ValueError(f"horizon must be nonnegative, not {horizon}")

    rng = check_random_state(seed)
    n_slots = int(np.ceil(horizon / slot_width))
    edges = np.minimum(np.arange(n_slots + 1) * slot_width, horizon)
    means = np.diff(_cumulative_intensity(profile, edges))
    return CountSeries(slot_width=slot_width, counts=rng.poisson(means))


def slot_index(times, slot_width, n_slots):
    """Slot of each event time, clipped to the last of ``n_slots`` slots.

    ``floor(t / slot_width)`` can round up to ``n_slots`` for times just below the horizon.
    """
    slots = np.floor(np.asarray(times, dtype=float) / slot_width).astype(int)
    return np.minimum(slots, n_slots - 1)


def bin_trace(trace, slot_width):
    """Count the events of a trace per slot.

    Returns
    -------
    :class:`CountSeries`
    """
    if not slot_width > 0:
        raise ValueError(f"slot_width must be positive, not {slot_width}")
    n_slots = int(np.ceil(trace.horizon / slot_width))
    slots = slot_index(trace.times, slot_width, n_slots)
    return CountSeries(slot_width=slot_width, counts=np.bincount(slots, minlength=n_slots))


def compose_counts(normal, change):
    """Combine normal-context counts with signed change counts.

    ``Y(t) = max(0, Y_N(t) + Y_C(t))`` per slot.

    Parameters
    ----------
    normal : :class:`CountSeries`
    change : :class:`CountSeries` or array_like of :obj:`int`
        Signed per-slot changes.

    Returns
    -------
    :class:`CountSeries`
    """
    if isinstance(change, CountSeries):
        if not np.isclose(change.slot_width, normal.slot_width):
            raise ValueError(
                f"Slot widths differ: {normal.slot_width} and {change.slot_width}"
            )
        change = change.counts
    change = np.asarray(change, dtype=int)
    if change.shape != normal.counts.shape:
        raise ValueError(
            f"Count series differ in length: {normal.counts.size} and {change.size}"
        )
    return CountSeries(
        slot_width=normal.slot_width, counts=np.maximum(0, normal.counts + change)
    )


def merge_traces(traces):
    """Merge traces over the same horizon into one time-sorted trace."""
    traces = list(traces)
    if not traces:
        raise ValueError("At least one trace is required.")
    horizon = traces[0].horizon
    for trace in traces[1:]:
        if not np.isclose(trace.horizon, horizon):
            raise ValueError(f"Trace horizons differ: {horizon} and {trace.horizon}")

    return Trace(
        np.concatenate([t.times for t in traces]),
        np.concatenate([t.sensor_ids for t in traces]),
        np.concatenate([t.values for t in traces]),
        horizon,
    )
