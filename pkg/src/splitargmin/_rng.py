"""Deterministic seed derivation.

Every randomized routine in the package consumes an integer seed and, when
it needs several independent streams (one per split, per subsample, per
replication), derives child seeds from the parent seed plus a small integer
path. Derivation goes through ``numpy.random.SeedSequence``, which mixes the
path into the entropy pool, so child streams are statistically independent,
reproducible, and stable across platforms.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1


def _entropy(seed: int, path: tuple[int, ...]) -> tuple[int, ...]:
    return (seed & _MASK,) + tuple(p & _MASK for p in path)


def derive_seed(seed: int, *path: int) -> int:
    """Return a 64-bit child seed determined by ``seed`` and ``path``."""
    ss = np.random.SeedSequence(_entropy(seed, path))
    return int(ss.generate_state(1, np.uint64)[0])


def rng_for(seed: int, *path: int) -> np.random.Generator:
    """Return a fresh generator keyed by ``seed`` and an optional path."""
    return np.random.default_rng(np.random.SeedSequence(_entropy(seed, path)))
