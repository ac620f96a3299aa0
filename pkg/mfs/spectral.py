"""Spectra of multiple-valued logic functions and stuck-at syndrome testability.

A g-valued function of n inputs is stored as its truth table, indexed by
``u = u_1 + u_2 * g + ... + u_n * g^(n-1)``, so ``u_1`` is the least significant digit.
Its spectrum uses the character kernel ``t_w(u) = exp(-2j * pi / g * sum_k w_k * u_k)``. The
inverse uses the conjugate kernel divided by ``g^n``.
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import pandas as pd

LGR = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MvlFunction:
    """Truth table of a g-valued function of n inputs.

    Parameters
    ----------
    g : :obj:`int`
        Radix, at least 2.
    n : :obj:`int`
        Number of inputs, at least 1.
    table : array_like of :obj:`int`
        ``g**n`` output values in 0..g-1, in index order.
    """

    g: int
    n: int
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.g < 2:
            raise ValueError(f"Radix g must be at least 2, not {self.g}")
        if self.n < 1:
            raise ValueError(f"Arity n must be at least 1, not {self.n}")
        table = np.asarray(self.table, dtype=int).ravel()
        if table.size != self.g**self.n:
            raise ValueError(
                f"A g={self.g}, n={self.n} function needs {self.g ** self.n} outputs, "
                f"not {table.size}"
            )
        if np.any((table < 0) | (table >= self.g)):
            raise ValueError(f"Outputs must lie in [0, {self.g - 1}]")
        object.__setattr__(self, "table", table)

    @classmethod
    def from_callable(cls, g, n, func):
        """Tabulate ``func(u_1, ..., u_n)`` over every input combination."""
        digits = input_digits(g, n)
        return cls(g=g, n=n, table=[func(*row) for row in digits])


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Complex spectral coefficients ``s_w`` of a g-valued function, in index order."""

    g: int
    n: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex).ravel()
        if coeffs.size != self.g**self.n:
            raise ValueError(f"Spectrum needs {self.g ** self.n} coefficients, not {coeffs.size}")
        object.__setattr__(self, "coeffs", coeffs)


@dataclass(frozen=True)
class StuckFault:
    """Input ``input_index`` (1-based) permanently stuck at ``stuck_value``."""

    input_index: int
    stuck_value: int


@lru_cache(maxsize=32)
def input_digits(g, n):
    """Digits of every table index.

    Returns
    -------
    (g**n, n) :class:`numpy.ndarray`
        Column ``k`` holds ``u_(k+1)``.
    """
    u = np.arange(g**n)
    digits = np.stack([(u // g**k) % g for k in range(n)], axis=1)
    digits.flags.writeable = False
    return digits


@lru_cache(maxsize=32)
def transform_matrix(g, n):
    """Forward kernel ``T[w, u] = t_w(u)``.

    Entries are looked up from the exact g-th roots of unity, so no phase accumulates.
    """
    digits = input_digits(g, n)
    exponents = (digits @ digits.T) % g
    roots = np.exp(-2j * np.pi * np.arange(g) / g)
    kernel = roots[exponents]
    kernel.flags.writeable = False
    return kernel


def forward(func):
    """Spectrum of a function.

    Parameters
    ----------
    func : :class:`MvlFunction`

    Returns
    -------
    :class:`Spectrum`
    """
    return Spectrum(func.g, func.n, transform_matrix(func.g, func.n) @ func.table)


def inverse(spectrum):
    """Recover the (complex) table values from a spectrum.

    Returns
    -------
    :class:`numpy.ndarray`
        ``y(u) = g^-n * sum_w conj(t_w(u)) * s_w``.
    """
    kernel = transform_matrix(spectrum.g, spectrum.n)
    return kernel.conj().T @ spectrum.coeffs / spectrum.g**spectrum.n


def syndrome(func):
    """Sum of all outputs of a function."""
    return int(func.table.sum())


def _check_fault(func, fault):
    if not 1 <= fault.input_index <= func.n:
        raise ValueError(f"input_index must lie in [1, {func.n}], not {fault.input_index}")
    if not 0 <= fault.stuck_value < func.g:
        raise ValueError(f"stuck_value must lie in [0, {func.g - 1}], not {fault.stuck_value}")


def faulted(func, fault):
    """Return the function seen when one input is stuck.

    Parameters
    ----------
    func : :class:`MvlFunction`
    fault : :class:`StuckFault`

    Returns
    -------
    :class:`MvlFunction`
        Every evaluation reads the stuck input as ``fault.stuck_value``.
    """
    _check_fault(func, fault)
    weight = func.g ** (fault.input_index - 1)
    digit = input_digits(func.g, func.n)[:, fault.input_index - 1]
    source = np.arange(func.table.size) + (fault.stuck_value - digit) * weight
    return MvlFunction(func.g, func.n, func.table[source])


def fault_oracle(func, fault):
    """Decide syndrome testability by simulating the fault.

    Returns
    -------
    :obj:`bool`
        True if the faulted function's output sum differs from the fault-free one.
    """
    return syndrome(faulted(func, fault)) != syndrome(func)


def stuck_testable(func, fault):
    """Decide syndrome testability from the spectrum.

    With input ``k`` stuck at ``v``, the syndrome becomes

    ``s_0 + sum_{j=1}^{g-1} exp(-2j * pi * j * v / g) * conj(s_{j e_k})``

    where ``j e_k`` is the index whose only nonzero digit is ``j`` at input ``k``. The fault
    is testable if and only if the sum over ``j`` is nonzero. That sum is an integer because
    the table is, so the test compares its magnitude with 1/2.

    Parameters
    ----------
    func : :class:`MvlFunction`
    fault : :class:`StuckFault`

    Returns
    -------
    :obj:`bool`
    """
    _check_fault(func, fault)
    g = func.g
    coeffs = forward(func).coeffs
    j = np.arange(1, g)
    single_digit = j * g ** (fault.input_index - 1)
    phases = np.exp(-2j * np.pi * ((j * fault.stuck_value) % g) / g)
    change = np.sum(phases * np.conj(coeffs[single_digit]))
    return bool(abs(change) > 0.5)


def testability_table(func):
    """Syndrome testability of every single stuck-at fault.

    Returns
    -------
    :class:`pandas.DataFrame`
        Columns ``input_index``, ``stuck_value`` and ``testable``.
    """
    rows = []
    for input_index in range(1, func.n + 1):
        for stuck_value in range(func.g):
            fault = StuckFault(input_index, stuck_value)
            rows.append((input_index, stuck_value, stuck_testable(func, fault)))
    return pd.DataFrame(rows, columns=["input_index", "stuck_value", "testable"])
