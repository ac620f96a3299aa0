"""Test mfs.io (Input/Output operations)."""
import json
import os
import os.path as op

import numpy as np
import pandas as pd
import pytest

from mfs import io
from mfs.io import ConfigError
from mfs.mmpp import TwoStateMmpp
from mfs.tests.utils import get_test_data_path, read_output


def test_load_config_yaml_and_json():
    """JSON and YAML documents load to the same kind of mapping."""
    doc = io.load_config(op.join(get_test_data_path(), "fuse_small.yaml"))
    assert doc["seed"] == 3
    assert doc["scenario"]["n_sensors"] == 6
    assert doc["_path"].endswith("fuse_small.yaml")

    doc = io.load_config(op.join(get_test_data_path(), "sweep_small.json"))
    assert doc["sweep"]["sizes"] == [6, 8]


def test_load_config_errors(tmp_path):
    """Unparsable, missing and non-mapping documents raise ConfigError."""
    with pytest.raises(ConfigError, match=r"broken\.yaml:\d+:\d+"):
        io.load_config(op.join(get_test_data_path(), "broken.yaml"))
    with pytest.raises(ConfigError, match="Cannot read"):
        io.load_config(tmp_path / "missing.yaml")

    listed = tmp_path / "list.yaml"
    listed.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError, match="mapping"):
        io.load_config(listed)


@pytest.mark.parametrize(
    "doc,subcommand,match",
    [
        pytest.param({}, "fuse", "scenario", id="missing_section"),
        pytest.param({"scenario": []}, "fuse", "must be a dict", id="section_type"),
        pytest.param({"scenario": {}, "seed": "x"}, "fuse", "seed", id="seed_type"),
        pytest.param({"scenario": {}, "time_scale": 0}, "fuse", "time_scale", id="time_scale"),
        pytest.param({"model": {}, "capture": {}}, "capture", "components", id="components"),
        pytest.param({"mvl": {}}, "mvl", "truth_table", id="truth_table"),
        pytest.param({"scenario": {}, "sweep": {"sizes": []}}, "sweep", "sizes", id="sizes"),
        pytest.param({}, "plot", "Unknown", id="subcommand"),
    ],
)
def test_validate_config_errors(doc, subcommand, match):
    """Check config validation failures."""
    with pytest.raises(ConfigError, match=match):
        io.validate_config(doc, subcommand)


def test_validate_bundled_configs(bundled_config):
    """Every bundled configuration is valid for its subcommand."""
    for name in io.CONFIG_SCHEMA:
        io.validate_config(bundled_config(name), name)


def test_config_hash():
    """Hashes ignore key order and bookkeeping keys but not values."""
    first = io.config_hash({"seed": 0, "scenario": {"a": 1, "b": 2}})
    second = io.config_hash({"scenario": {"b": 2, "a": 1}, "seed": 0, "_path": "/x"})
    assert first == second
    assert len(first) == 64
    assert io.config_hash({"seed": 1, "scenario": {"a": 1, "b": 2}}) != first


def test_components_from_config():
    """Both component forms are accepted and time units are scaled."""
    components = io.components_from_config(
        [{"tau": 30, "rate": 0.1}, {"delta12": 1, "delta21": 2, "r1": 0.5, "r2": 3}],
        time_scale=60,
    )
    assert np.isclose(components[0].delta12, 1 / 1800)
    assert components[0].r2 == 0.1
    assert np.isclose(components[1].delta21, 2 / 60)
    assert components[1].r1 == 0.5

    round_trip = io.components_from_config(io.components_to_dict(components))
    assert np.isclose(round_trip[1].delta21, components[1].delta21)

    with pytest.raises(ConfigError, match="missing"):
        io.components_from_config([{"tau": 30}])
    with pytest.raises(ConfigError, match="invalid"):
        io.components_from_config([{"tau": -1, "rate": 1}])
    with pytest.raises(ConfigError):
        io.components_from_config([3])


def test_nhpp_from_config():
    """Profiles are scaled to seconds."""
    profile = io.nhpp_from_config({"period": 10, "starts": [0, 5], "rates": [1, 2]}, 60)
    assert profile.period == 600
    assert profile.starts == (0, 300)
    with pytest.raises(ConfigError):
        io.nhpp_from_config({"period": 10, "starts": [1], "rates": [1]})
    with pytest.raises(ConfigError):
        io.nhpp_from_config({"period": 10})


def test_resolve_path():
    """Files are found next to the config, then among bundled resources."""
    doc = io.load_config(op.join(get_test_data_path(), "mvl_xor.json"))
    assert io.resolve_path("xor_binary.txt", doc).is_file()
    assert io.resolve_path("constant_ternary.txt", doc).is_file()
    assert io.resolve_path("constant_ternary.txt").is_file()


def test_load_truth_table():
    """Check truth tables with comments."""
    g, n, table = io.load_truth_table(op.join(get_test_data_path(), "xor_binary.txt"))
    assert (g, n) == (2, 2)
    assert list(table) == [0, 1, 1, 0]


@pytest.mark.parametrize(
    "filename,match",
    [
        pytest.param("bad_header.txt", r"bad_header\.txt:2", id="header"),
        pytest.param("short_table.txt", "expected 9", id="short"),
        pytest.param("missing.txt", "Cannot read", id="missing"),
    ],
)
def test_load_truth_table_errors(filename, match):
    """Malformed truth tables raise ConfigError."""
    with pytest.raises(ConfigError, match=match):
        io.load_truth_table(op.join(get_test_data_path(), filename))


def test_load_truth_table_values(tmp_path):
    """Outputs outside the radix and non-integers are rejected with their line."""
    bad = tmp_path / "bad.txt"
    bad.write_text("2 1\n0 2\n")
    with pytest.raises(ConfigError, match="outputs"):
        io.load_truth_table(bad)
    bad.write_text("2 1\n0\nx\n")
    with pytest.raises(ConfigError, match=":3:"):
        io.load_truth_table(bad)


def test_write_csv(tmp_path):
    """Tables get a provenance header, fixed float formatting and summary lines."""
    df = pd.DataFrame({"a": [1, 2], "b": [0.1, 1 / 3]})
    path = tmp_path / "table.csv"
    io.write_csv(df, path, "abc", 7, summary={"p_e": 0.25, "case": "x"})

    header, body, summary = read_output(path)
    assert header == "# config_hash=abc seed=7"
    assert body == ["a,b", "1,0.1", "2,0.333333333333"]
    assert summary == {"p_e": "0.25", "case": "x"}
    assert [name for name in os.listdir(tmp_path)] == ["table.csv"]

    first = path.read_bytes()
    io.write_csv(df, path, "abc", 7, summary={"p_e": 0.25, "case": "x"})
    assert path.read_bytes() == first


def test_write_csv_missing_directory(tmp_path):
    """Writing into a missing directory fails without leftovers."""
    with pytest.raises(OSError):
        io.write_csv(pd.DataFrame({"a": [1]}), tmp_path / "no" / "t.csv", "h", 0)
    assert not (tmp_path / "no").exists()


def test_components_to_dict_is_json():
    """Serialized components are plain JSON."""
    text = json.dumps(io.components_to_dict([TwoStateMmpp(1, 2, 3, 4)]))
    assert json.loads(text)[0]["r2"] == 4
