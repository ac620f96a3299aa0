"""Test mfs.workflows and the command-line interface."""
import os
import os.path as op

import numpy as np
import pytest

from mfs import cli, workflows
from mfs.io import components_from_config, load_config
from mfs.tests.utils import as_array, get_test_data_path, read_output
from mfs.utils import get_resource_path
from mfs.workflows.harness import CASES


def _config(name):
    return op.join(get_test_data_path(), name)


def test_mvl_workflow_function_smoke(tmp_path_factory):
    """Run smoke test for the truth-table workflow."""
    tmpdir = tmp_path_factory.mktemp("test_mvl_workflow_function_smoke")
    doc = load_config(_config("mvl_xor.json"))
    result = workflows.mvl_workflow(doc, output_dir=tmpdir)
    assert set(result.tables) == {"spectrum", "testability"}

    _, body, summary = read_output(op.join(tmpdir, "testability.csv"))
    assert body[0] == "input_index,stuck_value,testable"
    assert all(line.endswith(",false") for line in body[1:])
    assert summary["syndrome"] == "2"
    assert summary["oracle_mismatches"] == "0"

    _, body, _ = read_output(op.join(tmpdir, "spectrum.csv"))
    spectrum = as_array(body)
    assert np.allclose(spectrum[:, 1], [2, 0, 0, -2])


def test_mvl_workflow_cli_constant(tmp_path_factory):
    """No stuck-at fault of a constant function is syndrome testable."""
    tmpdir = tmp_path_factory.mktemp("test_mvl_workflow_cli_constant")
    status = cli._main(
        ["mvl", "--config", op.join(get_resource_path(), "mvl.json"), "--out", str(tmpdir)]
    )
    assert status == 0
    _, body, summary = read_output(op.join(tmpdir, "testability.csv"))
    assert len(body) == 7
    assert all(line.endswith(",false") for line in body[1:])
    assert summary["testable_faults"] == "0"


def test_fuse_workflow_cli_smoke(tmp_path_factory):
    """Run smoke test for the single-trial fusion workflow."""
    tmpdir = tmp_path_factory.mktemp("test_fuse_workflow_cli_smoke")
    status = cli._main(["fuse", "--config", _config("fuse_small.yaml"), "--out", str(tmpdir)])
    assert status == 0

    header, body, summary = read_output(op.join(tmpdir, "fusion_report.csv"))
    assert header.startswith("# config_hash=")
    assert header.endswith(" seed=3")
    assert len(header.split()[1]) == len("config_hash=") + 64
    assert body[0] == "epoch,true_hyp,fused,errors_so_far,flagged_sensors"
    assert len(body) == 13
    assert summary["case"] == "multivalued_ft_capture"
    report = as_array(body)
    assert int(summary["errors"]) == int(report[-1, 3])


def test_fuse_workflow_reruns_identically(tmp_path_factory):
    """Identical configs and seeds give byte-identical outputs."""
    outputs = []
    for i_run in range(2):
        tmpdir = tmp_path_factory.mktemp(f"test_fuse_workflow_reruns_{i_run}")
        args = ["fuse", "--config", _config("fuse_small.yaml"), "--out", str(tmpdir)]
        assert cli._main(args) == 0
        with open(op.join(tmpdir, "fusion_report.csv"), "rb") as file_object:
            outputs.append(file_object.read())
    assert outputs[0] == outputs[1]


def test_seed_precedence(tmp_path_factory, monkeypatch):
    """The command line beats the environment, which beats the document."""
    config = _config("fuse_small.yaml")

    tmpdir = tmp_path_factory.mktemp("test_seed_precedence_env")
    monkeypatch.setenv(cli.SEED_ENV, "17")
    assert cli._main(["fuse", "--config", config, "--out", str(tmpdir)]) == 0
    header, _, _ = read_output(op.join(tmpdir, "fusion_report.csv"))
    assert header.endswith(" seed=17")

    tmpdir = tmp_path_factory.mktemp("test_seed_precedence_cli")
    assert cli._main(["fuse", "--config", config, "--out", str(tmpdir), "--seed", "42"]) == 0
    header, _, _ = read_output(op.join(tmpdir, "fusion_report.csv"))
    assert header.endswith(" seed=42")

    monkeypatch.setenv(cli.SEED_ENV, "seventeen")
    assert cli._main(["fuse", "--config", config, "--out", str(tmpdir)]) == 1


def test_sweep_workflow_cli_smoke(tmp_path_factory):
    """Run smoke test for the network-size sweep."""
    tmpdir = tmp_path_factory.mktemp("test_sweep_workflow_cli_smoke")
    status = cli._main(
        ["sweep", "--config", _config("sweep_small.json"), "--out", str(tmpdir), "--quiet"]
    )
    assert status == 0

    _, body, _ = read_output(op.join(tmpdir, "sweep.csv"))
    assert body[0] == "n,case,p_e,ci_low,ci_high,trials,seed"
    rows = [line.split(",") for line in body[1:]]
    assert len(rows) == 6
    assert {row[1] for row in rows} == set(CASES)
    assert all(row[5] == "20" and row[6] == "1" for row in rows)
    assert all(float(row[3]) <= float(row[2]) <= float(row[4]) for row in rows)


def test_trace_workflow_function_smoke(tmp_path_factory):
    """Run smoke test for the on-off trace workflow."""
    tmpdir = tmp_path_factory.mktemp("test_trace_workflow_function_smoke")
    doc = load_config(_config("trace_small.json"))
    workflows.trace_workflow(doc, output_dir=tmpdir, seed=4)
    for name in ["sensor_1_events", "sensor_1_path", "sensor_2_events", "sensor_2_path", "trace"]:
        assert op.isfile(op.join(tmpdir, f"{name}.csv"))

    _, body, summary = read_output(op.join(tmpdir, "trace.csv"))
    assert body[0] == "time,sensor_id,value"
    assert int(summary["events"]) == len(body) - 1
    times = as_array(body)[:, 0] if len(body) > 1 else np.array([])
    assert np.all(np.diff(times) >= 0)

    _, body, _ = read_output(op.join(tmpdir, "counts.csv"))
    counts = as_array(body)
    assert counts.shape == (100, 4)
    assert np.array_equal(counts[:, 3], counts[:, 1] + counts[:, 2])


def test_capture_workflow_function_smoke(tmp_path_factory):
    """Run smoke test for the capture workflow."""
    tmpdir = tmp_path_factory.mktemp("test_capture_workflow_function_smoke")
    doc = load_config(_config("capture_small.json"))
    result = workflows.capture_workflow(doc, output_dir=tmpdir, seed=2, progress=False)
    for name in ["sensor_1_events", "sensor_2_events", "captured_events", "capture_report"]:
        assert op.isfile(op.join(tmpdir, f"{name}.csv"))

    table = result.get_table("capture_ratios")
    assert len(table) == 3
    assert table["mmpp_ratio"].between(0, 1).all()
    assert table["poisson_ratio"].between(0, 1).all()

    _, _, summary = read_output(op.join(tmpdir, "capture_ratios.csv"))
    assert int(summary["wins"]) + int(summary["losses"]) <= 3


def test_capture_experiment_seeds():
    """Runs are seeded from the master seed and repeat exactly."""
    components = components_from_config(
        [{"tau": 30, "rate": 1 / 15}, {"tau": 50, "rate": 0.1}], 60
    )
    kwargs = dict(slot_width=300.0, budget_factor=2.0, horizon=60000.0, n_seeds=2, seed=5)
    first = workflows.capture_experiment(components, progress=False, **kwargs)
    second = workflows.capture_experiment(components, progress=False, **kwargs)
    assert first.equals(second)
    assert list(first.columns) == workflows.capture.CAPTURE_COLUMNS
    with pytest.raises(ValueError):
        workflows.capture_experiment(components, 300.0, 2.0, 600.0, n_seeds=0)


def test_cli_usage_errors(tmp_path):
    """Usage errors exit with status 1."""
    with pytest.raises(SystemExit) as excinfo:
        cli._main(["fuse", "--config", str(tmp_path / "missing.yaml")])
    assert excinfo.value.code == 1

    with pytest.raises(SystemExit) as excinfo:
        cli._main([])
    assert excinfo.value.code == 1

    with pytest.raises(SystemExit) as excinfo:
        cli._main(["fuse", "--config", _config("fuse_small.yaml"), "--seed", "x"])
    assert excinfo.value.code == 1


def test_cli_config_and_runtime_errors(tmp_path):
    """Bad configs exit with status 1 and runtime failures with status 2."""
    assert cli._main(["fuse", "--config", _config("broken.yaml"), "--out", str(tmp_path)]) == 1
    args = ["sweep", "--config", _config("fuse_small.yaml"), "--out", str(tmp_path)]
    assert cli._main(args) == 1

    occupied = tmp_path / "occupied"
    occupied.write_text("")
    assert cli._main(["fuse", "--config", _config("fuse_small.yaml"), "--out", str(occupied)]) == 2
    assert not os.path.isdir(occupied)
