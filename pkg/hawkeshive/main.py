"""
Console entry point.

This module builds the click application and maps library exceptions to the
process exit codes: 0 success, 1 usage, 2 data, 3 numerical.
"""

import sys
from typing import Optional, Sequence

import click
import numpy as np

from .cli.commands import cli
from .core.errors import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, HawkesHiveException, handle_cli_exception
from .core.observability import get_logger

logger = get_logger(__name__)


def create_application() -> click.Group:
    """Return the configured CLI group."""
    return cli


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    app = create_application()
    args = list(sys.argv[1:] if argv is None else argv)
    command = next((a for a in args if a in app.commands), "hawkeshive")
    try:
        app.main(args=args, prog_name="hawkeshive", standalone_mode=False)
    except HawkesHiveException as exc:
        return handle_cli_exception(exc, command)
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        logger.error("numerical failure", command=command, exception=exc.__class__.__name__, message=str(exc))
        return EXIT_NUMERICAL
    return EXIT_OK


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
