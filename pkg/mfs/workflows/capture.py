"""Capture experiments on bursty two-sensor traffic."""
import logging

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm.auto import tqdm

from mfs.capture import CAPTURE_KINDS, MMPPCapture, PoissonCapture, capture_report, run_capture
from mfs.io import ConfigError, components_from_config, config_hash
from mfs.mmpp import mean_rate, superpose
from mfs.results import ExperimentResult
from mfs.stats import sign_test
from mfs.traffic import merge_traces, simulate_modulated
from mfs.utils import _check_ncores, check_random_state, derive_seed, tqdm_joblib

LGR = logging.getLogger(__name__)

CAPTURE_COLUMNS = ["seed", "mmpp_ratio", "poisson_ratio", "mmpp_mean_budget", "poisson_budget"]


def simulate_sensors(components, horizon, seed=None):
    """Simulate one sensor per component, with sensor ids 1, 2, ...

    Returns
    -------
    :obj:`list` of :class:`~mfs.traffic.Trace`
    """
    rng = check_random_state(seed)
    return [
        simulate_modulated(component, [i_sensor + 1], horizon, seed=rng)
        for i_sensor, component in enumerate(components)
    ]


def _equal_budget_poisson(trace, model, slot_width, mean_budget):
    """Capture ratio of a constant budget no smaller than ``mean_budget``."""
    budget = int(np.ceil(np.round(mean_budget, 9)))
    rate = mean_rate(model)
    if budget == 0 or rate == 0:
        return budget, 0.0 if len(trace) else 1.0

    baseline = PoissonCapture(rate, slot_width, budget_factor=budget / (rate * slot_width))
    _, _, ratio = run_capture(trace, baseline)
    return budget, ratio


def _compare_once(components, slot_width, budget_factor, horizon, run_seed):
    trace = merge_traces(simulate_sensors(components, horizon, seed=run_seed))
    model = superpose(components)
    report = capture_report(trace, MMPPCapture(model, slot_width, budget_factor))

    arrivals = report["arrivals"].sum()
    mmpp_ratio = report["captured"].sum() / arrivals if arrivals else 1.0
    mean_budget = report["budget"].mean() if len(report) else 0.0
    poisson_budget, poisson_ratio = _equal_budget_poisson(trace, model, slot_width, mean_budget)
    return mmpp_ratio, poisson_ratio, mean_budget, poisson_budget


def capture_experiment(
    components,
    slot_width,
    budget_factor,
    horizon,
    n_seeds=20,
    seed=0,
    n_cores=1,
    progress=True,
):
    """Compare mmpp capture with an equal-average-budget poisson baseline.

    Each run simulates one sensor per component, captures the merged trace with the mmpp
    filter, and captures the same trace with the constant budget
    ``ceil(mean mmpp budget)``.

    Parameters
    ----------
    components : :obj:`list` of :class:`~mfs.mmpp.TwoStateMmpp`
        Per-sensor traffic, in seconds.
    slot_width : :obj:`float`
    budget_factor : :obj:`float`
    horizon : :obj:`float`
    n_seeds : :obj:`int`, optional
        Number of matched runs. Default is 20.
    seed : :obj:`int`, optional
        Master seed; run ``i`` uses ``derive_seed(seed, i)``. Default is 0.
    n_cores : :obj:`int`, optional
        Default is 1.
    progress : :obj:`bool`, optional
        Default is True.

    Returns
    -------
    :class:`pandas.DataFrame`
        Columns ``seed``, ``mmpp_ratio``, ``poisson_ratio``, ``mmpp_mean_budget`` and
        ``poisson_budget``, one row per run.
    """
    if n_seeds < 1:
        raise ValueError(f"n_seeds must be at least 1, not {n_seeds}")
    components = list(components)
    n_cores = _check_ncores(n_cores)
    run_seeds = [derive_seed(seed, i_run) for i_run in range(n_seeds)]

    with tqdm_joblib(tqdm(total=n_seeds, desc="capture", disable=not progress)):
        results = Parallel(n_jobs=n_cores)(
            delayed(_compare_once)(components, slot_width, budget_factor, horizon, run_seed)
            for run_seed in run_seeds
        )

    table = pd.DataFrame(results, columns=CAPTURE_COLUMNS[1:])
    table.insert(0, "seed", np.array(run_seeds, dtype=np.uint64))
    return table


def summarize_capture(table):
    """Wins of mmpp over poisson and the one-sided sign test p-value.

    Tied runs are left out of the sign test.
    """
    wins = int((table["mmpp_ratio"] > table["poisson_ratio"]).sum())
    losses = int((table["mmpp_ratio"] < table["poisson_ratio"]).sum())
    return {
        "mean_mmpp_ratio": float(table["mmpp_ratio"].mean()),
        "mean_poisson_ratio": float(table["poisson_ratio"].mean()),
        "wins": wins,
        "losses": losses,
        "sign_test_p": float(sign_test(wins, wins + losses)),
    }


def capture_traces(components, capture_model, horizon, seed=None):
    """Sensor and captured event tables of one run.

    Parameters
    ----------
    components : :obj:`list` of :class:`~mfs.mmpp.TwoStateMmpp`
    capture_model : :class:`~mfs.capture.CaptureModel`
    horizon : :obj:`float`
    seed : None, :obj:`int` or :class:`numpy.random.Generator`, optional

    Returns
    -------
    tables : :obj:`dict`
        ``sensor_<id>_events`` per sensor, ``captured_events`` and ``capture_report``.
    ratio : :obj:`float`
        Captured fraction of all events.
    """
    traces = simulate_sensors(components, horizon, seed=seed)
    trace = merge_traces(traces)
    captured, _, ratio = run_capture(trace, capture_model)

    tables = {f"sensor_{i + 1}_events": t.to_frame() for i, t in enumerate(traces)}
    tables["captured_events"] = captured.to_frame()
    tables["capture_report"] = capture_report(trace, capture_model)
    return tables, ratio


def capture_workflow(doc, output_dir=".", seed=0, progress=True):
    """Write the capture traces of one run and the matched-seed capture comparison.

    ``model.components`` and the ``capture`` durations (``slot_width``, ``horizon``) are
    in config time units of ``time_scale`` seconds.

    Parameters
    ----------
    doc : :obj:`dict`
        Configuration with ``model`` and ``capture`` sections.
    output_dir : :obj:`str`, optional
    seed : :obj:`int`, optional
    progress : :obj:`bool`, optional

    Returns
    -------
    :class:`~mfs.results.ExperimentResult`
    """
    time_scale = doc.get("time_scale", 1.0)
    components = components_from_config(doc["model"]["components"], time_scale)
    section = doc["capture"]
    try:
        slot_width = section["slot_width"] * time_scale
        budget_factor = section["budget_factor"]
        horizon = section["horizon"] * time_scale
    except KeyError as exc:
        raise ConfigError(f"Section 'capture' is missing {exc}") from exc

    kind = section.get("kind", "mmpp")
    if kind not in CAPTURE_KINDS:
        raise ConfigError(f'capture kind must be one of {", ".join(CAPTURE_KINDS)}, not "{kind}"')

    model = superpose(components)
    if kind == "mmpp":
        capture_model = MMPPCapture(model, slot_width, budget_factor)
    else:
        capture_model = PoissonCapture(mean_rate(model), slot_width, budget_factor)

    result = ExperimentResult(config_hash=config_hash(doc), seed=seed)
    tables, ratio = capture_traces(components, capture_model, horizon, seed=derive_seed(seed, 0))
    LGR.info(f"The {kind} model captured {ratio:.4f} of all events.")
    for name, table in tables.items():
        summary = {"kind": kind, "ratio": ratio} if name == "capture_report" else None
        result.add_table(name, table, summary)

    n_seeds = section.get("seeds", 20)
    if n_seeds:
        table = capture_experiment(
            components,
            slot_width,
            budget_factor,
            horizon,
            n_seeds=n_seeds,
            seed=seed,
            n_cores=section.get("n_cores", 1),
            progress=progress,
        )
        summary = summarize_capture(table)
        LGR.info(
            f"mmpp capture beat the equal-budget poisson baseline on {summary['wins']} of "
            f"{n_seeds} seeds (sign test p={summary['sign_test_p']:.3g})."
        )
        result.add_table("capture_ratios", table, summary)

    result.save_tables(output_dir)
    return result
