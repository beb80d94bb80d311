"""Reproducible random streams.

Every random quantity in the package is drawn from a Philox generator keyed
by ``SeedSequence(master_seed, spawn_key=key)``. A key such as
``(SERIES, r)`` names the stream of replication ``r``, so results do not
depend on evaluation order or on how replications are split across workers.
"""

from __future__ import annotations

from typing import Union

import numpy as np

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator]

# stream namespaces used by the Monte Carlo harness
SERIES = 0
BOOTSTRAP = 1
ORACLE = 2
CUMULANT = 3


def seed_sequence(seed: int | np.random.SeedSequence, *key: int) -> np.random.SeedSequence:
    """Return the seed sequence for ``key`` under ``seed``.

    If ``seed`` is already a ``SeedSequence`` the key is appended to its own
    spawn key, so derived streams nest.
    """
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(key))
    if isinstance(seed, (bool, np.bool_)) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer or SeedSequence, got {type(seed).__name__}")
    if seed < 0 or seed >= 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))


def generator(seed: SeedLike, *key: int) -> np.random.Generator:
    """Build a counter-based generator for ``(seed, *key)``.

    A ``Generator`` passed in is returned untouched (``key`` must be empty).
    """
    if isinstance(seed, np.random.Generator):
        if key:
            raise ValueError("cannot derive a keyed stream from a live Generator")
        return seed
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *key)))
