"""Base class for experiment results."""
import logging
import os

from mfs.base import MFSBase
from mfs.io import write_csv

LGR = logging.getLogger(__name__)


class ExperimentResult(MFSBase):
    """Tables produced by one experiment run.

    Parameters
    ----------
    tables : :obj:`dict`, optional
        Table name mapped to :class:`pandas.DataFrame`.
    summaries : :obj:`dict`, optional
        Table name mapped to a dict of ``key=value`` summary entries written after the table.
    config_hash : :obj:`str`, optional
        Hash of the configuration that produced the results.
    seed : :obj:`int`, optional
        Master seed of the run.

    Attributes
    ----------
    tables : :obj:`dict`
    summaries : :obj:`dict`
    """

    def __init__(self, tables=None, summaries=None, config_hash="", seed=0):
        self.tables = tables or {}
        self.summaries = summaries or {}
        self.config_hash = config_hash
        self.seed = seed

    def get_table(self, name):
        """Get a particular table from the result."""
        return self.tables[name]

    def add_table(self, name, table, summary=None):
        """Store a table, with an optional summary."""
        self.tables[name] = table
        if summary:
            self.summaries[name] = summary
        return self

    def save_tables(self, output_dir="."):
        """Save every table to a CSV file named after it.

        Parameters
        ----------
        output_dir : :obj:`str`, optional
            Output directory in which to save results. If the directory doesn't
            exist, it will be created. Default is current directory.

        Returns
        -------
        paths : :obj:`list` of :obj:`str`
            Written files.
        """
        os.makedirs(output_dir, exist_ok=True)

        paths = []
        for name, table in self.tables.items():
            if table is None:
                LGR.warning(f"Table {name} is None. Not saving.")
                continue
            outpath = os.path.join(output_dir, name + ".csv")
            write_csv(table, outpath, self.config_hash, self.seed, self.summaries.get(name))
            paths.append(outpath)
        return paths
