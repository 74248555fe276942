"""Seedable, splittable random streams"""

from typing import Optional

import numpy as np


def make_rng(seed: Optional[int]) -> np.random.Generator:
    """Generator from an integer seed (fresh entropy if None)."""
    return np.random.default_rng(np.random.SeedSequence(seed))


def split_streams(seed: Optional[int], workers: int) -> list[np.random.Generator]:
    """Independent generators, one per worker, from a single seed."""
    children = np.random.SeedSequence(seed).spawn(workers)
    return [np.random.default_rng(child) for child in children]
