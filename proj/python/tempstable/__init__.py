"""Tempered stable laws, martingale measures and option pricing."""

from ._tempstable import *  # noqa: F401,F403
from ._tempstable import TempstableError, run_cli

__all__ = [name for name in dir() if not name.startswith("_")]


def main(argv=None):
    """Entry point for the ``tempstable`` console script."""
    import sys

    code, out, err = run_cli(list(sys.argv[1:] if argv is None else argv))
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code
