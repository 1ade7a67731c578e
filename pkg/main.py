# main.py
"""
Command-line entry point: `python main.py <command> ...` (program name pivq).
"""
import logging
import sys
from typing import List, Optional

import click

from cli.assign import assign
from cli.capacity import capacity, capacity_curve_command
from cli.probe import probe
from cli.quantize import quantize
from cli.sampling import interpolate_command, smooth_path_command
from cli.stats import stats
from cli.toy import toy_decode, toy_train
from cli.train import train_codebook
from cli.utils import EXIT_DATA_ERROR, EXIT_OK
from core.config import LOG_LEVEL

__version__ = "1.0.0"

# Logs go to stderr so stdout stays machine-readable
logging.basicConfig(level=getattr(logging, LOG_LEVEL, logging.WARNING), stream=sys.stderr)
logger = logging.getLogger("pivq")


@click.group(name="pivq", context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="pivq")
def cli():
    """Permutation-invariant vector quantization toolkit."""


cli.add_command(assign)
cli.add_command(quantize)
cli.add_command(capacity)
cli.add_command(capacity_curve_command)
cli.add_command(train_codebook)
cli.add_command(interpolate_command)
cli.add_command(smooth_path_command)
cli.add_command(probe)
cli.add_command(toy_train)
cli.add_command(toy_decode)
cli.add_command(stats)


def dispatch(argv: Optional[List[str]] = None) -> int:
    """
    Run one command and return its exit code instead of exiting.

    0 on success, 1 on data errors, 2 on usage errors. Error and usage text
    go to stdout with the rest of the human-readable output; logs stay on stderr.
    """
    try:
        result = cli.main(args=argv, prog_name="pivq", standalone_mode=False)
    except click.ClickException as e:
        e.show(file=sys.stdout)
        return e.exit_code
    except click.Abort:
        click.echo("Aborted!")
        return EXIT_DATA_ERROR
    return result if isinstance(result, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(dispatch(sys.argv[1:]))
