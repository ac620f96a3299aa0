"""Input/Output operations."""
import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path

import numpy as np
import yaml

from mfs.mmpp import NhppProfile, TwoStateMmpp
from mfs.utils import get_resource_path

LGR = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"

# Required sections and their types, per subcommand.
CONFIG_SCHEMA = {
    "trace": {"trace": dict},
    "capture": {"model": dict, "capture": dict},
    "mvl": {"mvl": dict},
    "fuse": {"scenario": dict},
    "sweep": {"scenario": dict, "sweep": dict},
}


class ConfigError(ValueError):
    """Invalid, unreadable or unparsable configuration or truth-table file."""


def load_config(filename):
    """Load a JSON or YAML configuration document.

    Parameters
    ----------
    filename : :obj:`str` or :obj:`pathlib.Path`

    Returns
    -------
    doc : :obj:`dict`
        The parsed document. Its ``_path`` key records the absolute file location.

    Raises
    ------
    ConfigError
        If the file cannot be read, does not parse, or is not a mapping.
    """
    path = Path(filename)
    try:
        text = path.read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"Cannot read config file {path}: {exc}") from exc

    try:
        doc = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        where = f"{path}:{mark.line + 1}:{mark.column + 1}" if mark else str(path)
        raise ConfigError(f"{where}: {exc.problem or exc.context}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    if not isinstance(doc, dict):
        raise ConfigError(f"{path}:1: config must be a mapping, not {type(doc).__name__}")

    doc["_path"] = str(path.resolve())
    return doc


def validate_config(doc, subcommand):
    """Check that a document has the sections a subcommand needs.

    Parameters
    ----------
    doc : :obj:`dict`
    subcommand : {"trace", "capture", "mvl", "fuse", "sweep"}

    Raises
    ------
    ConfigError
    """
    if subcommand not in CONFIG_SCHEMA:
        raise ConfigError(f"Unknown subcommand '{subcommand}'")

    for section, kind in CONFIG_SCHEMA[subcommand].items():
        if section not in doc:
            raise ConfigError(f"'{subcommand}' config is missing the '{section}' section")
        if not isinstance(doc[section], kind):
            raise ConfigError(
                f"Section '{section}' must be a {kind.__name__}, "
                f"not {type(doc[section]).__name__}"
            )

    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"seed must be an integer, not {seed!r}")

    time_scale = doc.get("time_scale", 1.0)
    if isinstance(time_scale, bool) or not isinstance(time_scale, (int, float)):
        raise ConfigError(f"time_scale must be a number, not {time_scale!r}")
    if not time_scale > 0:
        raise ConfigError(f"time_scale must be positive, not {time_scale}")

    if subcommand == "capture":
        _check_list(doc["model"], "components", "model")
    elif subcommand == "trace":
        _check_list(doc["trace"], "sources", "trace")
    elif subcommand == "mvl" and "truth_table" not in doc["mvl"]:
        raise ConfigError("Section 'mvl' needs a 'truth_table' entry")
    elif subcommand == "sweep":
        _check_list(doc["sweep"], "sizes", "sweep")


def _check_list(section, key, name):
    value = section.get(key)
    if not isinstance(value, list) or not value:
        raise ConfigError(f"Section '{name}' needs a nonempty '{key}' list")


def config_hash(doc):
    """SHA-256 of the canonical JSON encoding of a document.

    Keys starting with an underscore are bookkeeping and are left out.
    """
    public = {key: value for key, value in doc.items() if not str(key).startswith("_")}
    canonical = json.dumps(public, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def components_from_config(entries, time_scale=1.0):
    """Build two-state MMPP components from config entries.

    Each entry is either ``{"tau": ..., "rate": ...}`` (an on-off source) or
    ``{"delta12": ..., "delta21": ..., "r1": ..., "r2": ...}``. ``tau`` and the ``delta``
    rates are expressed in config time units, which last ``time_scale`` seconds. Event
    rates are per second.

    Returns
    -------
    :obj:`list` of :class:`~mfs.mmpp.TwoStateMmpp`
    """
    components = []
    for i_entry, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ConfigError(f"Component {i_entry} must be a mapping, not {entry!r}")
        try:
            if "tau" in entry:
                component = TwoStateMmpp.from_onoff(entry["tau"] * time_scale, entry["rate"])
            else:
                component = TwoStateMmpp(
                    delta12=entry["delta12"] / time_scale,
                    delta21=entry["delta21"] / time_scale,
                    r1=entry["r1"],
                    r2=entry["r2"],
                )
        except KeyError as exc:
            raise ConfigError(f"Component {i_entry} is missing {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"Component {i_entry} is invalid: {exc}") from exc
        components.append(component)
    return components


def components_to_dict(components):
    """Inverse of :func:`components_from_config` at unit time scale."""
    return [
        {"delta12": c.delta12, "delta21": c.delta21, "r1": c.r1, "r2": c.r2} for c in components
    ]


def nhpp_from_config(entry, time_scale=1.0):
    """Build an :class:`~mfs.mmpp.NhppProfile` from ``{"period", "starts", "rates"}``."""
    try:
        return NhppProfile(
            period=entry["period"] * time_scale,
            starts=tuple(s * time_scale for s in entry["starts"]),
            rates=tuple(entry["rates"]),
        )
    except KeyError as exc:
        raise ConfigError(f"NHPP profile is missing {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"NHPP profile is invalid: {exc}") from exc


def resolve_path(filename, doc=None):
    """Locate a file named in a config.

    Relative names are looked up next to the config file first, then among the bundled
    resources.
    """
    path = Path(filename)
    if path.is_absolute():
        return path

    candidates = []
    if doc is not None and "_path" in doc:
        candidates.append(Path(doc["_path"]).parent / path)
    candidates.append(Path(get_resource_path()) / path)
    for candidate in candidates:
        if candidate.is_file():
            return candidate
    return candidates[0]


def load_truth_table(filename):
    """Read a truth table file.

    The first non-blank, non-comment line holds ``g n``. The remaining whitespace-separated
    integers are the ``g**n`` outputs in index order. Lines starting with ``#`` are ignored.

    Returns
    -------
    g, n : :obj:`int`
    table : :class:`numpy.ndarray`

    Raises
    ------
    ConfigError
        With the offending line number.
    """
    path = Path(filename)
    try:
        lines = path.read_text().splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"Cannot read truth table {path}: {exc}") from exc

    header = None
    values = []
    for i_line, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            numbers = [int(token) for token in line.split()]
        except ValueError as exc:
            raise ConfigError(f"{path}:{i_line}: {exc}") from exc

        if header is None:
            if len(numbers) != 2:
                raise ConfigError(f"{path}:{i_line}: header must be 'g n', not '{line}'")
            header = (numbers[0], numbers[1], i_line)
        else:
            values.extend(numbers)

    if header is None:
        raise ConfigError(f"{path}: truth table is empty")

    g, n, i_header = header
    if g < 2 or n < 1:
        raise ConfigError(f"{path}:{i_header}: need g >= 2 and n >= 1, not g={g}, n={n}")
    if len(values) != g**n:
        raise ConfigError(f"{path}: expected {g ** n} outputs for g={g}, n={n}, not {len(values)}")
    table = np.array(values, dtype=int)
    if np.any((table < 0) | (table >= g)):
        raise ConfigError(f"{path}: outputs must lie in [0, {g - 1}]")
    return g, n, table


def write_csv(df, filename, config_hash, seed, summary=None):
    """Atomically write a table with a provenance header.

    The first line is ``# config_hash=<hex> seed=<int>``, then the CSV with floats
    formatted as ``%.12g``, then one ``# key=value`` line per summary entry.

    Parameters
    ----------
    df : :class:`pandas.DataFrame`
    filename : :obj:`str` or :obj:`pathlib.Path`
    config_hash : :obj:`str`
    seed : :obj:`int`
    summary : :obj:`dict`, optional
    """
    path = Path(filename)
    lines = [f"# config_hash={config_hash} seed={seed}\n"]
    lines.append(df.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n"))
    for key, value in (summary or {}).items():
        if isinstance(value, float):
            value = FLOAT_FORMAT % value
        lines.append(f"# {key}={value}\n")

    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as file_object:
            file_object.writelines(lines)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.remove(tmp_name)
        raise
    LGR.debug(f"Wrote {len(df)} rows to {path}")
    return path
