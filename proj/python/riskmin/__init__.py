"""Monte Carlo pricing, hedging, and valuation-adjustment engine.

The heavy lifting lives in the compiled extension; this package re-exports it
and adds one convenience wrapper for running a configuration file directly.
"""

from pathlib import Path

from ._core import config_hash, run, version

__version__ = version()
__all__ = ["config_hash", "run", "run_file", "version"]


def run_file(path, stage="all", **overrides):
    """Run the pipeline on a configuration file.

    ``overrides`` accepts the same knobs as the command line: ``seed``,
    ``paths``, ``steps``, ``output_dir``, ``threads``, ``no_cache``, and
    ``strict_display``.  Returns the result dict from :func:`run`.
    """
    return run(Path(path).read_text(), stage, overrides)
