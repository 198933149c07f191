"""Random Dirichlet series laboratory: sampling, certified evaluation and zero counting."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import __version__, run_experiment as _run_experiment


def run(subcommand, **settings):
    """Run a subcommand and return the report document as a dict.

    Keyword names use underscores in place of dashes (sigma_lo -> sigma-lo).
    Lists are joined with commas.
    """
    flat = {}
    for key, value in settings.items():
        if isinstance(value, (list, tuple)):
            value = ",".join(repr(float(v)) for v in value)
        elif isinstance(value, bool):
            value = "true" if value else "false"
        flat[key.replace("_", "-")] = str(value)
    return _json.loads(_run_experiment(subcommand, flat))
