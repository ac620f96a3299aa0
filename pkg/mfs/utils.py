"""Utility functions for MFS."""
import contextlib
import logging
import multiprocessing as mp
import os.path as op

import joblib
import numpy as np

LGR = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1


def _check_ncores(n_cores):
    """Check the number of cores requested for parallel trials.

    Non-positive values select every available core.
    """
    if n_cores <= 0:
        n_cores = mp.cpu_count()
    elif n_cores > mp.cpu_count():
        LGR.warning(
            f"Desired number of cores ({n_cores}) greater than number "
            f"available ({mp.cpu_count()}). Setting to {mp.cpu_count()}."
        )
        n_cores = mp.cpu_count()
    return n_cores


def get_resource_path():
    """Return the path to bundled configurations and truth tables, terminated with separator."""
    return op.abspath(op.join(op.dirname(__file__), "resources") + op.sep)


def check_random_state(seed):
    """Turn a seed into a :class:`numpy.random.Generator`.

    Parameters
    ----------
    seed : None, :obj:`int` or :class:`numpy.random.Generator`
        Existing generators are passed through unchanged.

    Returns
    -------
    rng : :class:`numpy.random.Generator`
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _splitmix64(x):
    """Apply one splitmix64 finalization step to a 64-bit integer."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(seed, trial_index):
    """Derive the seed of one Monte Carlo trial from the master seed.

    Parameters
    ----------
    seed : :obj:`int`
        Master seed of the experiment.
    trial_index : :obj:`int`
        Zero-based index of the trial.

    Returns
    -------
    trial_seed : :obj:`int`
        Unsigned 64-bit seed.

    Notes
    -----
    The master seed is mixed with splitmix64, the trial index is folded into the result and
    the sum is mixed again. Every case of an experiment uses the same trial seed, which keeps
    the cases matched pairs.
    """
    if trial_index < 0:
        raise ValueError(f"trial_index must be nonnegative, not {trial_index}")

    mixed = _splitmix64(int(seed) & _MASK64)
    return _splitmix64((mixed + int(trial_index)) & _MASK64)


@contextlib.contextmanager
def tqdm_joblib(tqdm_object):
    """Context manager to patch joblib to report into tqdm progress bar given as argument.

    From https://stackoverflow.com/a/58936697/2589328.
    """

    class TqdmBatchCompletionCallback(joblib.parallel.BatchCompletionCallBack):
        def __call__(self, *args, **kwargs):
            tqdm_object.update(n=self.batch_size)
            return super().__call__(*args, **kwargs)

    old_batch_callback = joblib.parallel.BatchCompletionCallBack
    joblib.parallel.BatchCompletionCallBack = TqdmBatchCompletionCallback
    try:
        yield tqdm_object
    finally:
        joblib.parallel.BatchCompletionCallBack = old_batch_callback
        tqdm_object.close()
