"""Markov-modulated and nonhomogeneous Poisson process models.

Two-state MMPP components are combined into a superposed MMPP with the Kronecker sum of
their generators. Superposed states are numbered 1..2^N; state ``i`` selects, for each
component ``k``, the component state ``h = 2 - mod(ceil(i / 2^(N-k)), 2)``, so the first
component is the most significant digit of the state index.
"""
import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import pandas as pd
from scipy import linalg, stats

LGR = logging.getLogger(__name__)


@dataclass(frozen=True)
class TwoStateMmpp:
    """Two-state Markov-modulated Poisson process.

    Parameters
    ----------
    delta12 : :obj:`float`
        Transition rate from state 1 to state 2.
    delta21 : :obj:`float`
        Transition rate from state 2 to state 1.
    r1 : :obj:`float`
        Poisson event rate in state 1.
    r2 : :obj:`float`
        Poisson event rate in state 2.
    """

    delta12: float
    delta21: float
    r1: float
    r2: float

    def __post_init__(self):
        for name in ("delta12", "delta21", "r1", "r2"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and nonnegative, not {value}")

    @classmethod
    def from_onoff(cls, tau, rate):
        """Build an interrupted Poisson process with mean on and off durations ``tau``.

        State 1 is "off" (no events) and state 2 is "on".
        """
        if tau <= 0:
            raise ValueError(f"tau must be positive, not {tau}")
        return cls(delta12=1 / tau, delta21=1 / tau, r1=0.0, r2=rate)

    @property
    def generator(self):
        """:class:`numpy.ndarray`: 2x2 infinitesimal generator."""
        return np.array([[-self.delta12, self.delta12], [self.delta21, -self.delta21]])

    @property
    def rates(self):
        """:class:`numpy.ndarray`: Per-state event rates ``(r1, r2)``."""
        return np.array([self.r1, self.r2], dtype=float)

    @property
    def is_ergodic(self):
        """:obj:`bool`: Whether the modulating chain has a unique steady state."""
        return self.delta12 + self.delta21 > 0

    def scaled(self, factor):
        """Return a copy whose event rates are multiplied by ``factor``."""
        return TwoStateMmpp(self.delta12, self.delta21, self.r1 * factor, self.r2 * factor)


@dataclass(frozen=True, eq=False)
class SuperposedMmpp:
    """Superposition of independent two-state MMPPs.

    Use :func:`superpose` to build one.

    Parameters
    ----------
    components : :obj:`tuple` of :class:`TwoStateMmpp`
    generator : (2^N, 2^N) :class:`numpy.ndarray`
    rates : (2^N,) :class:`numpy.ndarray`
    """

    components: tuple
    generator: np.ndarray = field(repr=False)
    rates: np.ndarray = field(repr=False)

    def __post_init__(self):
        dim = 2 ** len(self.components)
        if self.generator.shape != (dim, dim) or self.rates.shape != (dim,):
            raise ValueError(
                f"A superposition of {len(self.components)} components needs a {dim}x{dim} "
                f"generator and {dim} rates, not {self.generator.shape} and {self.rates.shape}"
            )
        if not np.allclose(self.generator.sum(axis=1), 0, atol=1e-10):
            raise ValueError("Generator rows must sum to zero.")
        off_diagonal = self.generator[~np.eye(dim, dtype=bool)]
        if np.any(off_diagonal < 0) or np.any(self.rates < 0):
            raise ValueError("Off-diagonal generator entries and rates must be nonnegative.")

    @property
    def num_components(self):
        """:obj:`int`: Number of superposed components."""
        return len(self.components)

    @property
    def n_states(self):
        """:obj:`int`: Number of superposed states, 2^N."""
        return self.rates.size


class AutocovTerm(NamedTuple):
    """One exponential term ``alpha * exp(-beta * t)`` of the rate autocovariance."""

    alpha: float
    beta: float


@dataclass(frozen=True)
class NhppProfile:
    """Periodic piecewise-constant rate schedule of a nonhomogeneous Poisson process.

    Parameters
    ----------
    period : :obj:`float`
        Length of one period.
    starts : :obj:`tuple` of :obj:`float`
        Segment start times. The first must be 0 and they must increase strictly.
    rates : :obj:`tuple` of :obj:`float`
        Rate of each segment. A segment runs until the next start, or the period end.
    """

    period: float
    starts: tuple
    rates: tuple

    def __post_init__(self):
        object.__setattr__(self, "starts", tuple(float(s) for s in self.starts))
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        if not self.period > 0:
            raise ValueError(f"period must be positive, not {self.period}")
        if len(self.starts) == 0 or len(self.starts) != len(self.rates):
            raise ValueError("An NHPP profile needs one rate per segment start.")
        if self.starts[0] != 0:
            raise ValueError(f"The first segment must start at 0, not {self.starts[0]}")
        if np.any(np.diff(self.starts) <= 0) or self.starts[-1] >= self.period:
            raise ValueError("Segment starts must increase strictly and lie within the period.")
        if any(r < 0 for r in self.rates):
            raise ValueError(f"Segment rates must be nonnegative, not {self.rates}")

    @classmethod
    def constant(cls, rate, period=1.0):
        """Single-segment profile with rate ``rate``."""
        return cls(period=period, starts=(0.0,), rates=(rate,))

    @property
    def ends(self):
        """:class:`numpy.ndarray`: Segment end times within the period."""
        return np.append(np.asarray(self.starts[1:]), self.period)


def _generator_of(model):
    if isinstance(model, (TwoStateMmpp, SuperposedMmpp)):
        return model.generator
    return np.asarray(model, dtype=float)


def steady_state(model):
    """Stationary distribution of a modulating chain.

    Parameters
    ----------
    model : :class:`TwoStateMmpp`, :class:`SuperposedMmpp` or array_like
        Component, superposition, or a raw generator matrix.

    Returns
    -------
    probs : :class:`numpy.ndarray`
        Probabilities ``pi`` with ``pi @ G = 0`` and ``sum(pi) = 1``.

    Notes
    -----
    The transposed generator has one redundant row; it is replaced by the normalization
    constraint and the system is solved directly.
    """
    if isinstance(model, TwoStateMmpp) and not model.is_ergodic:
        raise ValueError(
            f"Steady state is undefined for a non-ergodic component ({model}); "
            "delta12 + delta21 must be positive."
        )
    generator = _generator_of(model)
    n_states = generator.shape[0]
    system = generator.T.copy()
    system[-1, :] = 1.0
    rhs = np.zeros(n_states)
    rhs[-1] = 1.0
    try:
        probs = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as exc:
        raise ValueError("Generator does not have a unique steady state.") from exc
    return probs


def superpose(components):
    """Superpose independent two-state MMPPs.

    Parameters
    ----------
    components : :obj:`list` of :class:`TwoStateMmpp`

    Returns
    -------
    :class:`SuperposedMmpp`
        Generator ``G_1 (+) G_2 (+) ... (+) G_N`` and rates ``R_1 (+) ... (+) R_N``, with
        the first component as the most significant Kronecker operand.
    """
    components = tuple(components)
    if not components:
        raise ValueError("At least one component is required for a superposition.")
    for component in components:
        if not isinstance(component, TwoStateMmpp):
            raise ValueError(f"Components must be TwoStateMmpp, not {type(component)}")

    generator = components[0].generator
    rates = components[0].rates
    for component in components[1:]:
        identity = np.eye(generator.shape[0])
        generator = np.kron(generator, np.eye(2)) + np.kron(identity, component.generator)
        rates = np.kron(rates, np.ones(2)) + np.kron(np.ones(rates.size), component.rates)

    return SuperposedMmpp(components=components, generator=generator, rates=rates)


def autocov_terms(components):
    """Exponential terms of the autocovariance of the superposed rate process.

    Term ``k`` has ``alpha = (r2 - r1)^2 * theta1 * (1 - theta1)`` and
    ``beta = delta12 + delta21`` for component ``k``.
    """
    terms = []
    for component in components:
        theta1 = steady_state(component)[0]
        alpha = (component.r2 - component.r1) ** 2 * theta1 * (1 - theta1)
        terms.append(AutocovTerm(alpha=float(alpha), beta=component.delta12 + component.delta21))
    return terms


def eval_autocov(terms, t):
    """Evaluate ``sum_j alpha_j * exp(-beta_j * t)``.

    Parameters
    ----------
    terms : :obj:`list` of :class:`AutocovTerm`
    t : :obj:`float` or array_like
        Nonnegative time lag(s).
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError(f"Time lag must be nonnegative, not {t}")

    value = np.zeros_like(t)
    for term in terms:
        value = value + term.alpha * np.exp(-term.beta * t)
    return float(value) if value.ndim == 0 else value


def autocov_from_generator(model, t):
    """Rate autocovariance computed directly from the superposed chain.

    ``pi R exp(G t) R 1 - (pi R 1)^2``, where ``R`` is the diagonal rate matrix.
    """
    if t < 0:
        raise ValueError(f"Time lag must be nonnegative, not {t}")
    probs = steady_state(model)
    transition = linalg.expm(model.generator * t)
    mean = probs @ model.rates
    return float((probs * model.rates) @ transition @ model.rates - mean**2)


def state_map(i, n_components):
    """Map a superposed state index to the per-component states.

    Parameters
    ----------
    i : :obj:`int`
        Superposed state index, 1..2^N.
    n_components : :obj:`int`
        Number of components N.

    Returns
    -------
    :obj:`list` of :obj:`tuple`
        ``(h, k)`` pairs, one per component ``k = 1..N``, with ``h`` in {1, 2}.
    """
    if n_components < 1:
        raise ValueError(f"n_components must be at least 1, not {n_components}")
    if not 1 <= i <= 2**n_components:
        raise ValueError(f"State index must lie in [1, {2 ** n_components}], not {i}")

    pairs = []
    for k in range(1, n_components + 1):
        block = 2 ** (n_components - k)
        pairs.append((2 - (-(-i // block)) % 2, k))
    return pairs


def generic_params(model, i):
    """Arrival rate and stationary probability of superposed state ``i``.

    Returns
    -------
    rate : :obj:`float`
        Sum of the selected per-component event rates.
    prob : :obj:`float`
        Product of the selected per-component steady-state probabilities.
    """
    rate, prob = 0.0, 1.0
    for h, k in state_map(i, model.num_components):
        component = model.components[k - 1]
        rate += component.rates[h - 1]
        prob *= steady_state(component)[h - 1]
    return rate, prob


def rate_diff_expand(r_delta, d):
    """Expand a base rate and N rate differences into 2^N superposed rates.

    ``r_i = r_delta + sum_k d_k * (1 - mod(ceil(i / 2^(N-k)), 2))`` for ``i = 1..2^N``.
    """
    d = np.atleast_1d(np.asarray(d, dtype=float))
    n_components = d.size
    if n_components < 1:
        raise ValueError("At least one rate difference is required.")

    i = np.arange(1, 2**n_components + 1)
    rates = np.full(i.size, float(r_delta))
    for k in range(1, n_components + 1):
        block = 2 ** (n_components - k)
        rates += d[k - 1] * (1 - (-(-i // block)) % 2)
    return rates


def rate_differences(components):
    """Base rate and per-component differences that reproduce a superposition's rates."""
    r_delta = sum(component.r1 for component in components)
    d = np.array([component.r2 - component.r1 for component in components])
    return r_delta, d


def mean_rate(model):
    """Long-run arrival rate of a superposed MMPP."""
    return float(steady_state(model) @ model.rates)


def rate_distribution(model):
    """Marginal distribution of the instantaneous arrival rate.

    Returns
    -------
    :class:`pandas.DataFrame`
        Columns ``rate`` and ``probability``, one row per distinct rate, sorted by rate.
    """
    table = pd.DataFrame({"rate": np.round(model.rates, 12), "probability": steady_state(model)})
    return table.groupby("rate", as_index=False)["probability"].sum()


def nhpp_rate(profile, t):
    """Rate of a periodic piecewise-constant profile at time(s) ``t``.

    Segments are left-closed, and ``t`` wraps modulo the period.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError(f"Time must be nonnegative, not {t}")

    idx = np.searchsorted(profile.starts, np.mod(t, profile.period), side="right") - 1
    rates = np.asarray(profile.rates)[idx]
    return float(rates) if rates.ndim == 0 else rates


def _cumulative_intensity(profile, t):
    """Integral of the rate over [0, t)."""
    t = np.asarray(t, dtype=float)
    starts = np.asarray(profile.starts)
    rates = np.asarray(profile.rates)
    seg_lengths = profile.ends - starts
    per_period = np.sum(rates * seg_lengths)

    n_periods, phase = np.divmod(t, profile.period)
    covered = np.clip(phase[..., None] - starts, 0, seg_lengths)
    return n_periods * per_period + np.sum(covered * rates, axis=-1)


def expected_count(profile, t0, t1):
    """Expected number of NHPP events in [t0, t1)."""
    if t1 < t0:
        raise ValueError(f"Interval end {t1} precedes its start {t0}")
    return float(_cumulative_intensity(profile, t1) - _cumulative_intensity(profile, t0))


def poisson_pmf(x, lam):
    """Poisson probability ``exp(-lam) * lam^x / x!``."""
    if int(x) != x or x < 0:
        raise ValueError(f"Count must be a nonnegative integer, not {x}")
    if lam < 0:
        raise ValueError(f"Rate must be nonnegative, not {lam}")
    return float(stats.poisson.pmf(int(x), lam))
