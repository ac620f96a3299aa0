"""Monte Carlo fusion experiments over sensor networks with stuck sensors."""
import logging
from functools import lru_cache
from typing import NamedTuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm.auto import tqdm

from mfs.base import MFSBase
from mfs.capture import MMPPCapture, PoissonCapture, allocate_budgets, capture_mask
from mfs.fusion import (
    HypothesisModel,
    StuckDetector,
    binary_confusion,
    confusion_matrix,
    fuse_fault_tolerant,
    local_decide,
    sigma_from_osnr,
)
from mfs.io import ConfigError, components_from_config, config_hash
from mfs.mmpp import TwoStateMmpp, mean_rate, superpose
from mfs.results import ExperimentResult
from mfs.stats import wilson_interval
from mfs.traffic import merge_traces, simulate_modulated, slot_index
from mfs.utils import _check_ncores, check_random_state, derive_seed, tqdm_joblib

LGR = logging.getLogger(__name__)

CASES = ("binary_baseline", "multivalued_ft", "multivalued_ft_capture")
EPOCH_COLUMNS = ["epoch", "true_hyp", "fused", "errors_so_far", "flagged_sensors"]
SWEEP_COLUMNS = ["n", "case", "p_e", "ci_low", "ci_high", "trials", "seed"]

# Per-sensor bursty traffic: 30 s and 50 s mean phases, 0.05 vs 0.4 decisions per second.
DEFAULT_COMPONENTS = (
    TwoStateMmpp(delta12=1 / 30, delta21=1 / 30, r1=0.05, r2=0.4),
    TwoStateMmpp(delta12=1 / 50, delta21=1 / 50, r1=0.05, r2=0.4),
)


class ErrorEstimate(NamedTuple):
    """Monte Carlo error probability with its 95% Wilson interval."""

    p_e: float
    ci_low: float
    ci_high: float
    trials: int


class ScenarioConfig(MFSBase):
    """Parameters of one fusion scenario.

    Parameters
    ----------
    case : {"binary_baseline", "multivalued_ft", "multivalued_ft_capture"}, optional
        ``binary_baseline`` quantizes observations at the midpoint of the extreme levels and
        fuses binarily over the extreme hypotheses, without detection, under the poisson
        capture. ``multivalued_ft`` runs stuck detection and fault-tolerant fusion of
        g-valued decisions under the poisson capture. ``multivalued_ft_capture`` does the
        same under the mmpp capture. Default is "multivalued_ft_capture".
    n_sensors : :obj:`int`, optional
        Default is 20.
    n_faulty : :obj:`int`, optional
        Number of stuck sensors. Default is 5.
    osnr_db : :obj:`float`, optional
        Observation SNR of every sensor. Default is 2.
    trials : :obj:`int`, optional
        Default is 10000.
    seed : :obj:`int`, optional
        Master seed. Default is 0.
    slot_width : :obj:`float`, optional
        Epoch and capture slot width, in seconds. Default is 5.
    budget_factor : :obj:`float`, optional
        Capture budget factor. Default is 1.0.
    window : :obj:`int`, optional
        Stuck detection window. Default is 8.
    min_variation : :obj:`int`, optional
        Minimum number of majority changes within the window. Default is 2.
    epochs : :obj:`int`, optional
        Fusion epochs per trial. Default is 20.
    components : :obj:`tuple` of :class:`~mfs.mmpp.TwoStateMmpp`, optional
        Per-sensor traffic of each sensor group. Sensors are assigned to groups round-robin.
        Default is :data:`DEFAULT_COMPONENTS`.
    stuck_value : :obj:`int`, optional
        Value reported by every stuck sensor. Default draws one per sensor uniformly.
    detection : :obj:`bool`, optional
        Default is on for the multi-valued cases and off for the binary baseline.
    capture : :obj:`bool`, optional
        If False, every event is received. Default is True.
    g : :obj:`int`, optional
        Number of hypotheses. Default is 3.
    priors, levels : array_like, optional
        Default is uniform priors at levels ``0..g-1``.
    threshold : :obj:`float`, optional
        Binary baseline quantization threshold. Default is the midpoint of the extreme
        levels.
    """

    def __init__(
        self,
        case="multivalued_ft_capture",
        n_sensors=20,
        n_faulty=5,
        osnr_db=2.0,
        trials=10000,
        seed=0,
        slot_width=5.0,
        budget_factor=1.0,
        window=8,
        min_variation=2,
        epochs=20,
        components=None,
        stuck_value=None,
        detection=None,
        capture=True,
        g=3,
        priors=None,
        levels=None,
        threshold=None,
    ):
        self.case = case
        self.n_sensors = n_sensors
        self.n_faulty = n_faulty
        self.osnr_db = osnr_db
        self.trials = trials
        self.seed = seed
        self.slot_width = slot_width
        self.budget_factor = budget_factor
        self.window = window
        self.min_variation = min_variation
        self.epochs = epochs
        self.components = components
        self.stuck_value = stuck_value
        self.detection = detection
        self.capture = capture
        self.g = g
        self.priors = priors
        self.levels = levels
        self.threshold = threshold
        self.validate()

    def validate(self):
        """Check parameter ranges, raising :class:`ValueError` on the first violation."""
        if self.case not in CASES:
            raise ValueError(f'case must be one of {", ".join(CASES)}, not "{self.case}"')
        if self.n_sensors < 1:
            raise ValueError(f"n_sensors must be positive, not {self.n_sensors}")
        if not 0 <= self.n_faulty <= self.n_sensors:
            raise ValueError(f"n_faulty must lie in [0, {self.n_sensors}], not {self.n_faulty}")
        if self.trials < 1:
            raise ValueError(f"trials must be at least 1, not {self.trials}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be at least 1, not {self.epochs}")
        if self.window < 2:
            raise ValueError(f"window must be at least 2, not {self.window}")
        if self.min_variation < 1:
            raise ValueError(f"min_variation must be at least 1, not {self.min_variation}")
        if not (self.slot_width > 0 and self.budget_factor > 0):
            raise ValueError("slot_width and budget_factor must be positive")
        if self.stuck_value is not None and not 0 <= self.stuck_value < self.g:
            raise ValueError(f"stuck_value must lie in [0, {self.g - 1}], not {self.stuck_value}")
        if not self.model_components:
            raise ValueError("At least one traffic component is required.")
        if self.hypothesis_model.g != self.g:
            raise ValueError(f"Got {self.hypothesis_model.g} priors for g={self.g} hypotheses")
        return self

    @property
    def model_components(self):
        """:obj:`tuple` of :class:`~mfs.mmpp.TwoStateMmpp`: Traffic of each sensor group."""
        if self.components is None:
            return DEFAULT_COMPONENTS
        return tuple(self.components)

    @property
    def hypothesis_model(self):
        """:class:`~mfs.fusion.HypothesisModel`: Observation model at ``osnr_db``."""
        priors = np.full(self.g, 1 / self.g) if self.priors is None else self.priors
        levels = np.arange(self.g, dtype=float) if self.levels is None else self.levels
        sigma = sigma_from_osnr(self.osnr_db, levels, priors)
        return HypothesisModel(priors=priors, sigma=sigma, levels=levels)

    @property
    def is_binary(self):
        """:obj:`bool`: Whether sensors quantize to one bit."""
        return self.case == "binary_baseline"

    @property
    def uses_detection(self):
        """:obj:`bool`: Whether stuck detection runs."""
        if self.detection is None:
            return not self.is_binary
        return bool(self.detection)

    @property
    def capture_kind(self):
        """:obj:`str`: Capture model used by the fusion center."""
        return "mmpp" if self.case == "multivalued_ft_capture" else "poisson"

    @property
    def group_sizes(self):
        """:obj:`tuple` of :obj:`int`: Number of sensors in each traffic group."""
        n_groups = len(self.model_components)
        return tuple(len(range(k, self.n_sensors, n_groups)) for k in range(n_groups))


class _World(NamedTuple):
    times: np.ndarray
    sensor_ids: np.ndarray
    epoch_of: np.ndarray
    truth: np.ndarray
    observations: np.ndarray
    stuck: np.ndarray


@lru_cache(maxsize=128)
def _fusion_center_model(components, group_sizes):
    """Superposition of every group's aggregate traffic."""
    return superpose(
        component.scaled(size) for component, size in zip(components, group_sizes) if size > 0
    )


def _draw_world(cfg, hyp, rng):
    """Draw everything random in a trial. The draws do not depend on the case."""
    horizon = cfg.epochs * cfg.slot_width
    n_groups = len(cfg.model_components)
    traces = [
        simulate_modulated(component, np.arange(k, cfg.n_sensors, n_groups), horizon, rng, cfg.g)
        for k, component in enumerate(cfg.model_components)
        if k < cfg.n_sensors
    ]
    trace = merge_traces(traces)
    truth = rng.choice(cfg.g, size=cfg.epochs, p=hyp.priors)

    faulty = rng.choice(cfg.n_sensors, size=cfg.n_faulty, replace=False)
    drawn = rng.integers(0, cfg.g, size=cfg.n_faulty)
    stuck = np.full(cfg.n_sensors, -1, dtype=int)
    stuck[faulty] = drawn if cfg.stuck_value is None else cfg.stuck_value

    epoch_of = slot_index(trace.times, cfg.slot_width, cfg.epochs)
    noise = rng.standard_normal(len(trace))
    observations = hyp.levels[truth[epoch_of]] + hyp.sigma * noise
    return _World(trace.times, trace.sensor_ids, epoch_of, truth, observations, stuck)


def _binary_threshold(cfg, hyp):
    if cfg.threshold is not None:
        return cfg.threshold
    return (hyp.levels[0] + hyp.levels[-1]) / 2


def _local_decisions(cfg, hyp, world):
    """Decision value of every event, with stuck sensors overriding their observations."""
    stuck = world.stuck[world.sensor_ids]
    is_stuck = stuck >= 0
    if cfg.is_binary:
        threshold = _binary_threshold(cfg, hyp)
        values = (world.observations > threshold).astype(int)
        stuck = (hyp.levels[np.clip(stuck, 0, None)] > threshold).astype(int)
    else:
        values = np.asarray(local_decide(world.observations, hyp), dtype=int)
    values[is_stuck] = stuck[is_stuck]
    return values


def _receive(cfg, world):
    """Mask of the events the fusion center captures.

    Both capture kinds are provisioned with the constant poisson budget. The mmpp center
    raises the budget of slots in which its filter predicts a burst, so it receives every
    event the poisson center receives.
    """
    if not cfg.capture:
        return np.ones(world.times.size, dtype=bool)

    model = _fusion_center_model(cfg.model_components, cfg.group_sizes)
    capture_model = PoissonCapture(mean_rate(model), cfg.slot_width, cfg.budget_factor)
    if cfg.capture_kind == "mmpp":
        capture_model = MMPPCapture(
            model, cfg.slot_width, cfg.budget_factor, min_budget=capture_model.budget()
        )

    counts = np.bincount(world.epoch_of, minlength=cfg.epochs)
    budgets, _ = allocate_budgets(counts, capture_model)
    return capture_mask(world.times, cfg.slot_width, budgets)


def _run_epochs(cfg, trial_seed, fuse_every_epoch):
    """Simulate one trial.

    Returns
    -------
    truth, fused, flagged : :class:`numpy.ndarray`
        Per epoch. ``fused`` is -1 for epochs that were not fused.
    """
    rng = check_random_state(trial_seed)
    hyp = cfg.hypothesis_model
    world = _draw_world(cfg, hyp, rng)
    values = _local_decisions(cfg, hyp, world)
    received = _receive(cfg, world)

    sensor_ids = world.sensor_ids[received]
    values = values[received]
    bounds = np.searchsorted(world.epoch_of[received], np.arange(cfg.epochs + 1))

    if cfg.is_binary:
        confusions = binary_confusion(hyp, _binary_threshold(cfg, hyp))
        priors = hyp.priors[[0, -1]] / hyp.priors[[0, -1]].sum()
        to_hypothesis = np.array([0, cfg.g - 1])
    else:
        confusions = confusion_matrix(hyp)
        priors = hyp.priors
        to_hypothesis = np.arange(cfg.g)

    detector = None
    if cfg.uses_detection:
        detector = StuckDetector(
            cfg.n_sensors, to_hypothesis.size, cfg.window, cfg.min_variation
        )

    flags = np.zeros(cfg.n_sensors, dtype=bool)
    fused = np.full(cfg.epochs, -1, dtype=int)
    flagged = np.zeros(cfg.epochs, dtype=int)
    for epoch in range(cfg.epochs):
        epoch_ids = sensor_ids[bounds[epoch] : bounds[epoch + 1]]
        epoch_values = values[bounds[epoch] : bounds[epoch + 1]]
        if detector is not None:
            flags = detector.update(epoch_ids, epoch_values)
        if fuse_every_epoch or epoch == cfg.epochs - 1:
            decisions = np.column_stack([epoch_ids, epoch_values])
            z = fuse_fault_tolerant(decisions, flags, confusions, priors)
            fused[epoch] = to_hypothesis[z]
        flagged[epoch] = flags.sum()

    return world.truth, fused, flagged


def simulate_epochs(cfg, trial_seed):
    """Per-epoch fusion report of one trial.

    Parameters
    ----------
    cfg : :class:`ScenarioConfig`
    trial_seed : :obj:`int`

    Returns
    -------
    :class:`pandas.DataFrame`
        Columns ``epoch``, ``true_hyp``, ``fused``, ``errors_so_far`` and
        ``flagged_sensors``.
    """
    truth, fused, flagged = _run_epochs(cfg, trial_seed, fuse_every_epoch=True)
    return pd.DataFrame(
        {
            "epoch": np.arange(cfg.epochs),
            "true_hyp": truth,
            "fused": fused,
            "errors_so_far": np.cumsum(fused != truth),
            "flagged_sensors": flagged,
        },
        columns=EPOCH_COLUMNS,
    )


def run_trial(cfg, trial_seed):
    """Run one trial and report whether the final fused decision is correct.

    Every trial runs ``cfg.epochs`` epochs so that detection has a history to work with.
    Only the last epoch is scored.

    Parameters
    ----------
    cfg : :class:`ScenarioConfig`
    trial_seed : :obj:`int`
        Seed of every random draw in the trial.

    Returns
    -------
    :obj:`bool`
    """
    truth, fused, _ = _run_epochs(cfg, trial_seed, fuse_every_epoch=False)
    return bool(fused[-1] == truth[-1])


def estimate_error(cfg, n_cores=1, progress=True):
    """Estimate the error probability of a scenario.

    Trial ``i`` is seeded with ``derive_seed(cfg.seed, i)``.

    Parameters
    ----------
    cfg : :class:`ScenarioConfig`
    n_cores : :obj:`int`, optional
        Number of cores for parallel trials. Non-positive values use every core.
        Default is 1.
    progress : :obj:`bool`, optional
        Show a progress bar. Default is True.

    Returns
    -------
    :class:`ErrorEstimate`
    """
    cfg.validate()
    n_cores = _check_ncores(n_cores)

    with tqdm_joblib(tqdm(total=cfg.trials, desc=cfg.case, disable=not progress)):
        outcomes = Parallel(n_jobs=n_cores)(
            delayed(run_trial)(cfg, derive_seed(cfg.seed, i_trial))
            for i_trial in range(cfg.trials)
        )

    errors = cfg.trials - int(np.sum(outcomes))
    ci_low, ci_high = wilson_interval(errors, cfg.trials)
    return ErrorEstimate(errors / cfg.trials, ci_low, ci_high, cfg.trials)


def sweep_network_size(cfg, sizes, cases=CASES, n_cores=1, progress=True):
    """Estimate the error probability of every case over network sizes.

    All cases and sizes use the master seed of ``cfg``, so cases are matched pairs.

    Parameters
    ----------
    cfg : :class:`ScenarioConfig`
        Base scenario. Its ``case`` and ``n_sensors`` are overridden.
    sizes : :obj:`list` of :obj:`int`
    cases : :obj:`list` of :obj:`str`, optional
        Default is every case.
    n_cores : :obj:`int`, optional
    progress : :obj:`bool`, optional

    Returns
    -------
    :class:`pandas.DataFrame`
        Columns ``n``, ``case``, ``p_e``, ``ci_low``, ``ci_high``, ``trials`` and ``seed``.
    """
    sizes = list(sizes)
    if not sizes:
        raise ValueError("At least one network size is required.")

    rows = []
    for size in sizes:
        for case in cases:
            scenario = cfg.copy().set_params(n_sensors=int(size), case=case)
            LGR.info(f"Estimating the error probability of {case} with {size} sensors.")
            estimate = estimate_error(scenario, n_cores=n_cores, progress=progress)
            rows.append((size, case, *estimate, cfg.seed))

    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def scenario_from_config(doc, seed):
    """Build a :class:`ScenarioConfig` from the ``scenario`` section of a document.

    ``components`` entries follow :func:`~mfs.io.components_from_config`, and the
    document's ``time_scale`` applies to them and to ``slot_width``.
    """
    section = dict(doc["scenario"])
    time_scale = doc.get("time_scale", 1.0)
    valid = set(ScenarioConfig._get_param_names()) - {"seed"}
    unknown = set(section) - valid
    if unknown:
        raise ConfigError(f"Unknown scenario parameters: {', '.join(sorted(unknown))}")

    if "components" in section:
        section["components"] = tuple(components_from_config(section["components"], time_scale))
    if "slot_width" in section:
        section["slot_width"] = section["slot_width"] * time_scale
    try:
        return ScenarioConfig(seed=seed, **section)
    except TypeError as exc:
        raise ConfigError(f"Invalid scenario parameters: {exc}") from exc


def fuse_workflow(doc, output_dir=".", seed=0, progress=True):
    """Run one fusion trial and write its per-epoch report.

    Parameters
    ----------
    doc : :obj:`dict`
        Configuration with a ``scenario`` section.
    output_dir : :obj:`str`, optional
    seed : :obj:`int`, optional
    progress : :obj:`bool`, optional
        Unused, for a uniform workflow signature.

    Returns
    -------
    :class:`~mfs.results.ExperimentResult`
    """
    cfg = scenario_from_config(doc, seed)
    LGR.info(f"Running one {cfg.case} trial with {cfg.n_sensors} sensors.")
    report = simulate_epochs(cfg, derive_seed(seed, 0))
    errors = int(report["errors_so_far"].iloc[-1])
    result = ExperimentResult(config_hash=config_hash(doc), seed=seed)
    result.add_table(
        "fusion_report",
        report,
        {"case": cfg.case, "errors": errors, "p_e": errors / cfg.epochs},
    )
    result.save_tables(output_dir)
    LGR.info(f"{errors} of {cfg.epochs} epochs were fused incorrectly.")
    return result


def sweep_workflow(doc, output_dir=".", seed=0, progress=True):
    """Estimate error probabilities over network sizes and write the sweep table.

    Parameters
    ----------
    doc : :obj:`dict`
        Configuration with ``scenario`` and ``sweep`` sections.
    output_dir : :obj:`str`, optional
    seed : :obj:`int`, optional
    progress : :obj:`bool`, optional

    Returns
    -------
    :class:`~mfs.results.ExperimentResult`
    """
    cfg = scenario_from_config(doc, seed)
    sweep = doc["sweep"]
    cases = sweep.get("cases", list(CASES))
    unknown = set(cases) - set(CASES)
    if unknown:
        raise ConfigError(f"Unknown cases: {', '.join(sorted(unknown))}")

    table = sweep_network_size(
        cfg, sweep["sizes"], cases, n_cores=sweep.get("n_cores", 1), progress=progress
    )
    result = ExperimentResult(config_hash=config_hash(doc), seed=seed)
    result.add_table("sweep", table)
    result.save_tables(output_dir)
    return result
