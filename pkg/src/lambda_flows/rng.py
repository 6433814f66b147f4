"""
Seeded random streams

Every replicate owns independent numpy generators derived from
``SeedSequence([root_seed, replicate, stream])``, so results depend only on the
seed and the replicate index, never on scheduling.
"""

from typing import Dict, List

import numpy as np

STREAM_GRAPH = 0
STREAM_TYPES = 1
STREAM_BRIDGE = 2
STREAM_SAMPLES = 3
STREAM_COALESCENT = 4

MAX_SEED = 2**64


def make_rng(seed: int, replicate: int = 0, stream: int = 0) -> np.random.Generator:
    """Generator for one (seed, replicate, stream) triple"""
    if not 0 <= seed < MAX_SEED:
        raise ValueError(f"Seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.default_rng(np.random.SeedSequence([seed, replicate, stream]))


def sample_subset(rng: np.random.Generator, b: int, p: int) -> List[int]:
    """Uniform p-subset of range(b), sorted, via a sparse partial Fisher-Yates shuffle"""
    swapped: Dict[int, int] = {}
    chosen = []
    for k in range(p):
        j = int(rng.integers(k, b))
        chosen.append(swapped.get(j, j))
        swapped[j] = swapped.get(k, k)
    chosen.sort()
    return chosen
