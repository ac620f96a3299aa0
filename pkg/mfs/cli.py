"""Command-line interface for the MFS experiments."""
import argparse
import logging
import os
import os.path as op
import sys

from mfs.io import ConfigError, load_config, validate_config
from mfs.workflows.capture import capture_workflow
from mfs.workflows.harness import fuse_workflow, sweep_workflow
from mfs.workflows.mvl import mvl_workflow
from mfs.workflows.trace import trace_workflow

LGR = logging.getLogger(__name__)

SEED_ENV = "MFS_SEED"

SUBCOMMANDS = {
    "trace": (trace_workflow, "Simulate on-off sensor traffic and write event traces."),
    "capture": (
        capture_workflow,
        "Capture bursty two-sensor traffic with the mmpp filter and compare it with an "
        "equal-budget poisson baseline.",
    ),
    "mvl": (mvl_workflow, "Spectrum and stuck-at syndrome testability of a truth table."),
    "fuse": (fuse_workflow, "Run one fusion trial and write its per-epoch report."),
    "sweep": (sweep_workflow, "Error probability of every fusion case over network sizes."),
}


class _ArgumentParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _is_valid_file(parser, arg):
    """Check if argument is existing file."""
    if not op.isfile(arg) and arg is not None:
        parser.error(f"The file {arg} does not exist!")

    return arg


def _get_parser():
    """Parse command line inputs for MFS.

    Returns
    -------
    parser : :class:`argparse.ArgumentParser`
    """
    parser = _ArgumentParser(prog="mfs")
    subparsers = parser.add_subparsers(dest="subcommand", help="MFS subcommands")
    subparsers.required = True
    for name, (workflow, description) in SUBCOMMANDS.items():
        subparser = subparsers.add_parser(name, help=description, description=description)
        subparser.set_defaults(func=workflow)
        subparser.add_argument(
            "--config",
            dest="config",
            metavar="PATH",
            required=True,
            type=lambda x, p=subparser: _is_valid_file(p, x),
            help="JSON or YAML configuration document.",
        )
        subparser.add_argument(
            "--out",
            dest="out",
            metavar="PATH",
            type=str,
            default=".",
            help="Output directory. It is created if needed.",
        )
        subparser.add_argument(
            "--seed",
            dest="seed",
            type=int,
            default=None,
            help=f"Master seed. Overrides ${SEED_ENV} and the document's seed.",
        )
        subparser.add_argument(
            "--quiet",
            dest="quiet",
            action="store_true",
            help="Only log warnings and hide progress bars.",
        )
    return parser


def _resolve_seed(cli_seed, doc):
    """Master seed from the command line, the environment, or the document, in that order."""
    if cli_seed is not None:
        return cli_seed

    env_seed = os.environ.get(SEED_ENV, "").strip()
    if env_seed:
        try:
            return int(env_seed)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV} must be an integer, not '{env_seed}'") from exc

    return doc.get("seed", 0)


def execute(options):
    """Run one subcommand.

    Parameters
    ----------
    options : :class:`argparse.Namespace`
        Parsed command line.

    Returns
    -------
    :obj:`int`
        0 on success, 1 on a configuration or validation error, 2 on a runtime failure.
    """
    if options.quiet:
        logging.getLogger().setLevel(logging.WARNING)

    try:
        doc = load_config(options.config)
        validate_config(doc, options.subcommand)
        seed = _resolve_seed(options.seed, doc)
        os.makedirs(options.out, exist_ok=True)
        LGR.info(f"Running '{options.subcommand}' with seed {seed}.")
        options.func(doc, output_dir=options.out, seed=seed, progress=not options.quiet)
    except ValueError as exc:
        print(f"mfs {options.subcommand}: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"mfs {options.subcommand}: failed: {exc}", file=sys.stderr)
        return 2

    return 0


def _main(argv=None):
    """Run MFS CLI entrypoint."""
    options = _get_parser().parse_args(argv)
    return execute(options)


if __name__ == "__main__":
    sys.exit(_main())
