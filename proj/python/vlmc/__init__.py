"""Stationary measures of variable length Markov chains."""

import json

from ._vlmc import *  # noqa: F401,F403
from ._vlmc import make_family as _make_family


def make_family(name, **params):
    """Build a named family. Keyword arguments are the family parameters,
    e.g. ``q=0.3`` or ``q={"kind": "random", "seed": 1}``."""
    return _make_family(name, json.dumps(params) if params else "")
