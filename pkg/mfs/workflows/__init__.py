"""Experiment workflows behind the command-line subcommands."""

from .capture import capture_experiment, capture_workflow
from .harness import (
    ScenarioConfig,
    estimate_error,
    fuse_workflow,
    run_trial,
    simulate_epochs,
    sweep_network_size,
    sweep_workflow,
)
from .mvl import mvl_workflow
from .trace import trace_workflow

__all__ = [
    "capture_experiment",
    "capture_workflow",
    "ScenarioConfig",
    "estimate_error",
    "fuse_workflow",
    "run_trial",
    "simulate_epochs",
    "sweep_network_size",
    "sweep_workflow",
    "mvl_workflow",
    "trace_workflow",
]
