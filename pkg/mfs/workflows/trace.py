"""Workflow for on-off decision traffic traces."""
import logging

import numpy as np
import pandas as pd

from mfs.io import ConfigError, config_hash, nhpp_from_config
from mfs.results import ExperimentResult
from mfs.traffic import (
    OnOffSource,
    bin_trace,
    compose_counts,
    merge_traces,
    simulate_nhpp_counts,
    simulate_onoff,
)
from mfs.utils import check_random_state

LGR = logging.getLogger(__name__)


def sources_from_config(entries, g=2, time_scale=1.0):
    """Build on-off sources from ``{"tau", "rate", "sensor_id"}`` entries.

    ``sensor_id`` defaults to the entry's 1-based position.
    """
    sources = []
    for i_entry, entry in enumerate(entries):
        try:
            sources.append(
                OnOffSource(
                    tau=entry["tau"] * time_scale,
                    rate=entry["rate"],
                    sensor_id=entry.get("sensor_id", i_entry + 1),
                    g=g,
                )
            )
        except KeyError as exc:
            raise ConfigError(f"Source {i_entry} is missing {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"Source {i_entry} is invalid: {exc}") from exc
    return sources


def trace_workflow(doc, output_dir=".", seed=0, progress=True):
    """Simulate on-off sensors and write their event traces.

    Writes one ``sensor_<id>_events`` and ``sensor_<id>_path`` table per source and the
    merged ``trace``. When the document has a ``model.nhpp`` profile, the normal-context
    counts are composed with the binned burst traffic into a ``counts`` table.

    Parameters
    ----------
    doc : :obj:`dict`
        Configuration with a ``trace`` section.
    output_dir : :obj:`str`, optional
    seed : :obj:`int`, optional
    progress : :obj:`bool`, optional
        Unused, for a uniform workflow signature.

    Returns
    -------
    :class:`~mfs.results.ExperimentResult`
    """
    time_scale = doc.get("time_scale", 1.0)
    section = doc["trace"]
    if "horizon" not in section:
        raise ConfigError("Section 'trace' is missing 'horizon'")
    horizon = section["horizon"] * time_scale
    sources = sources_from_config(section["sources"], section.get("g", 2), time_scale)

    rng = check_random_state(seed)
    result = ExperimentResult(config_hash=config_hash(doc), seed=seed)
    traces = []
    for source in sources:
        trace, path = simulate_onoff(source, horizon, seed=rng, return_path=True)
        on_fraction = float(((path["end"] - path["start"]) * (path["state"] == 2)).sum())
        on_fraction = on_fraction / horizon if horizon else 0.0
        LGR.info(
            f"Sensor {source.sensor_id} emitted {len(trace)} decisions, on {on_fraction:.3f} "
            "of the time."
        )
        result.add_table(
            f"sensor_{source.sensor_id}_events", trace.to_frame(), {"events": len(trace)}
        )
        result.add_table(f"sensor_{source.sensor_id}_path", path, {"on_fraction": on_fraction})
        traces.append(trace)

    merged = merge_traces(traces)
    result.add_table("trace", merged.to_frame(), {"events": len(merged)})

    nhpp = doc.get("model", {}).get("nhpp")
    if nhpp is not None:
        slot_width = section.get("slot_width", 1.0) * time_scale
        profile = nhpp_from_config(nhpp, time_scale)
        normal = simulate_nhpp_counts(profile, slot_width, horizon, seed=rng)
        change = bin_trace(merged, slot_width)
        total = compose_counts(normal, change)
        counts = pd.DataFrame(
            {
                "slot": np.arange(len(total)),
                "normal": normal.counts,
                "change": change.counts,
                "total": total.counts,
            }
        )
        result.add_table("counts", counts)

    result.save_tables(output_dir)
    return result
