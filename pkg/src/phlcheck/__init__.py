"""Model checking probabilistic hyperproperties of Markov decision processes."""

import os

__version__ = "0.1.0"


def seed_from_env(default: int = 0) -> int:
    """Seed for randomized test-support code, taken from ``PHLCHECK_SEED`` when set."""
    raw = os.environ.get("PHLCHECK_SEED")
    return int(raw) if raw not in (None, "") else default
