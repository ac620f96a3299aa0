"""Workflow for spectral stuck-at analysis of a truth table."""
import logging

import numpy as np
import pandas as pd

from mfs.io import config_hash, load_truth_table, resolve_path
from mfs.results import ExperimentResult
from mfs.spectral import (
    MvlFunction,
    StuckFault,
    fault_oracle,
    forward,
    syndrome,
    testability_table,
)

LGR = logging.getLogger(__name__)


def spectrum_table(func):
    """Spectral coefficients of a function, one row per index ``w``."""
    coeffs = forward(func).coeffs
    return pd.DataFrame(
        {
            "w": np.arange(coeffs.size),
            "real": np.round(coeffs.real, 9) + 0.0,
            "imag": np.round(coeffs.imag, 9) + 0.0,
            "magnitude": np.round(np.abs(coeffs), 9),
        }
    )


def mvl_workflow(doc, output_dir=".", seed=0, progress=True):
    """Compute the spectrum and syndrome testability of a truth table.

    Parameters
    ----------
    doc : :obj:`dict`
        Configuration whose ``mvl.truth_table`` names the table file.
    output_dir : :obj:`str`, optional
    seed : :obj:`int`, optional
        Recorded in the output headers only.
    progress : :obj:`bool`, optional
        Unused, for a uniform workflow signature.

    Returns
    -------
    :class:`~mfs.results.ExperimentResult`
    """
    path = resolve_path(doc["mvl"]["truth_table"], doc)
    g, n, table = load_truth_table(path)
    func = MvlFunction(g=g, n=n, table=table)
    LGR.info(f"Loaded a g={g}, n={n} function from {path}.")

    testability = testability_table(func)
    if doc["mvl"].get("check_oracle", True):
        oracle = [fault_oracle(func, fault) for fault in _faults(testability)]
        mismatches = int(np.sum(testability["testable"].values != np.array(oracle)))
        if mismatches:
            LGR.warning(f"{mismatches} faults disagree with fault simulation.")
    else:
        mismatches = None

    summary = {
        "g": g,
        "n": n,
        "syndrome": syndrome(func),
        "testable_faults": int(testability["testable"].sum()),
        "faults": len(testability),
    }
    if mismatches is not None:
        summary["oracle_mismatches"] = mismatches

    result = ExperimentResult(config_hash=config_hash(doc), seed=seed)
    result.add_table("spectrum", spectrum_table(func))
    flags = testability["testable"].map({True: "true", False: "false"})
    written = testability.assign(testable=flags)
    result.add_table("testability", written, summary)
    result.save_tables(output_dir)
    return result


def _faults(testability):
    return [
        StuckFault(int(row.input_index), int(row.stuck_value))
        for row in testability.itertuples(index=False)
    ]
