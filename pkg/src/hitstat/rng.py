"""Deterministic substream construction for parallel sampling.

Every sample of an experiment draws from its own counter-based substream
keyed by ``(seed, sample_index, role)``.  Splitting work across processes
therefore cannot change any sample's randomness: worker counts and chunk
boundaries are invisible to the results.
"""
from __future__ import annotations

import numpy as np


def substream(seed: int, *path: int) -> np.random.Generator:
    """Generator for the substream addressed by ``(seed, *path)``.

    Philox is counter-based, so distinct key tuples give statistically
    independent streams, and the mapping is stable across platforms.
    """
    seq = np.random.SeedSequence((int(seed),) + tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(seed=seq))
