"""Simulated quantum selection of the Tikhonov regularization parameter."""

import json

from ._core import *  # noqa: F401,F403
from ._core import run as _run


def run_report(**options):
    """Run one configuration and return its records as a list of dicts."""
    return [json.loads(line) for line in _run(**options).splitlines()]
