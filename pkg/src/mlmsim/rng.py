"""Deterministic random stream derivation.

Every run consumes randomness through streams keyed by
``(master_seed, experiment, block)``.  Streams are independent of each
other and of how work is partitioned across workers, so any scheduling
of blocks reproduces the same draws bit for bit.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError

# Experiment identifiers used by the built-in drivers. Sweeps offset
# SWEEP_BASE by the grid-point index so each point gets its own streams.
EXPERIMENT_SIMULATE = 0
EXPERIMENT_GOODNESS = 1
EXPERIMENT_DITHER = 2
EXPERIMENT_COVERING = 3
EXPERIMENT_SWEEP_BASE = 100

_MAX_SEED = 2**64


def block_stream(seed: int, experiment: int, block: int) -> np.random.Generator:
    """Return the generator for one ``(experiment, block)`` stream id."""
    seed = int(seed)
    experiment = int(experiment)
    block = int(block)
    if not 0 <= seed < _MAX_SEED:
        raise InvalidInputError(f"master seed must be a 64-bit unsigned integer, got {seed}")
    if experiment < 0 or block < 0:
        raise InvalidInputError("experiment and block ids must be non-negative")
    return np.random.default_rng((seed, experiment, block))
