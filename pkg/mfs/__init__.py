"""MFS: multi-valued decision fusion simulator for wireless sensor networks."""
import logging
import warnings

from ._version import __version__

logging.basicConfig(level=logging.INFO)

with warnings.catch_warnings(record=True) as w:
    warnings.simplefilter("ignore")
    from . import (
        base,
        capture,
        fusion,
        io,
        mmpp,
        results,
        spectral,
        stats,
        traffic,
        utils,
        workflows,
    )

    __all__ = [
        "base",
        "capture",
        "fusion",
        "io",
        "mmpp",
        "results",
        "spectral",
        "stats",
        "traffic",
        "utils",
        "workflows",
        "__version__",
    ]
