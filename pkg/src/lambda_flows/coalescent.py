"""
Lambda-coalescent on [n]

Exact simulation of the restricted coalescent as a continuous-time jump chain:
with b blocks the chain waits an Exponential(R(b)) time, picks a merger size p
with probability C(b,p) lambda_{b,p} / R(b) and merges a uniform p-subset of
the blocks.
"""

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .errors import SimulationError
from .log import get_logger
from .measure import LambdaMeasure, merger_weights
from .parallel import MeasureRef, map_replicates, measure_ref, resolve_measure
from .partition import PartitionN, coag, encode_single_block, identity_partition
from .rng import STREAM_COALESCENT, make_rng, sample_subset

logger = get_logger("coalescent")

MAX_STEPS = 10**8


@dataclass(frozen=True)
class CoalescentPath:
    """One realisation of the n-coalescent

    ``merges[k]`` holds the 1-based indices (in the partition before jump k) of
    the blocks merged at ``times[k]``; entry 0 is the initial state. Partitions
    are rebuilt from the merges on demand.
    """

    n: int
    times: Tuple[float, ...]
    block_counts: Tuple[int, ...]
    merges: Tuple[Tuple[int, ...], ...]
    horizon: float = math.inf
    absorbed: bool = False
    stalled: bool = False
    seed: Optional[int] = None
    replicate: int = 0
    _partitions: Optional[Tuple[PartitionN, ...]] = field(default=None, repr=False, compare=False)

    @cached_property
    def steps(self) -> List[Tuple[float, PartitionN]]:
        """(jump_time, partition) pairs, starting with (0, O_[n])"""
        if self._partitions is not None:
            return list(zip(self.times, self._partitions))
        out = []
        current = identity_partition(self.n)
        for time, merged in zip(self.times, self.merges):
            if merged:
                current = coag(current, encode_single_block(merged, current.num_blocks))
            out.append((time, current))
        return out

    def __len__(self) -> int:
        return len(self.times)


def simulate_coalescent(
    m: LambdaMeasure,
    n: int,
    horizon: Optional[float] = None,
    seed: int = 0,
    replicate: int = 0,
    rng: Optional[np.random.Generator] = None,
    track_partitions: bool = False,
) -> CoalescentPath:
    """
    Simulate the Lambda-coalescent restricted to [n]

    Args:
        m: Lambda measure
        n: Number of initial blocks (n >= 2)
        horizon: Stop time; None runs until a single block remains
        seed: Root seed of the replicate streams
        replicate: Replicate index
        rng: Generator to use instead of the seeded stream
        track_partitions: Store every partition eagerly instead of on demand

    Returns:
        CoalescentPath
    """
    if n < 2:
        raise SimulationError(f"Need at least two blocks, got n={n}")
    if horizon is not None and horizon < 0.0:
        raise SimulationError(f"Horizon must be non-negative, got {horizon}")
    if rng is None:
        rng = make_rng(seed, replicate, STREAM_COALESCENT)

    times = [0.0]
    counts = [n]
    merges: List[Tuple[int, ...]] = [()]
    partitions = [identity_partition(n)] if track_partitions else None
    kingman_only = m.is_kingman_only
    b = n
    t = 0.0
    stalled = False
    steps = 0
    while b > 1:
        if kingman_only:
            weights = None
            total = m.kingman_mass * b * (b - 1) / 2.0
        else:
            weights = merger_weights(m, b)
            total = float(weights.sum())
        if total <= 0.0:
            logger.warning("Total merger rate vanishes with %d blocks; path stalls", b)
            stalled = True
            break
        t += rng.exponential(1.0 / total)
        if horizon is not None and t > horizon:
            break
        if weights is None:
            p = 2
        else:
            cumulative = np.cumsum(weights)
            p = min(int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side="right")) + 2, b)
        merged = tuple(i + 1 for i in sample_subset(rng, b, p))
        if partitions is not None:
            partitions.append(coag(partitions[-1], encode_single_block(merged, b)))
        b -= p - 1
        times.append(t)
        counts.append(b)
        merges.append(merged)
        steps += 1
        if steps >= MAX_STEPS:
            raise SimulationError(f"Step cap of {MAX_STEPS} reached before the horizon")

    return CoalescentPath(
        n=n,
        times=tuple(times),
        block_counts=tuple(counts),
        merges=tuple(merges),
        horizon=math.inf if horizon is None else float(horizon),
        absorbed=b == 1,
        stalled=stalled,
        seed=seed,
        replicate=replicate,
        _partitions=tuple(partitions) if partitions is not None else None,
    )


def _index_at(path: CoalescentPath, t: float) -> int:
    if t < 0.0:
        raise SimulationError(f"Time must be non-negative, got {t}")
    if t > path.horizon and not (path.absorbed or path.stalled):
        raise SimulationError(f"t={t} lies beyond the simulated horizon {path.horizon}")
    return bisect_right(path.times, t) - 1


def block_count_curve(path: CoalescentPath, t_grid: Sequence[float]) -> List[int]:
    """Number of blocks at each grid time (right-continuous)"""
    return [path.block_counts[_index_at(path, t)] for t in t_grid]


def partition_at(path: CoalescentPath, t: float) -> PartitionN:
    """Partition in force at time t"""
    return path.steps[_index_at(path, t)][1]


def tmrca(path: CoalescentPath) -> float:
    """Absorption time of an absorbed path"""
    if not path.absorbed:
        raise SimulationError("Path was not run until a single block remained")
    return path.times[-1]


def _replicate_task(payload: Tuple[MeasureRef, int, Optional[float], int, int]) -> CoalescentPath:
    ref, n, horizon, seed, replicate = payload
    return simulate_coalescent(resolve_measure(ref), n, horizon, seed=seed, replicate=replicate)


def simulate_replicates(
    m: LambdaMeasure,
    n: int,
    replicates: int,
    seed: int,
    horizon: Optional[float] = None,
    threads: int = 1,
) -> List[CoalescentPath]:
    """Independent paths, replicate r drawn from stream (seed, r)"""
    ref = measure_ref(m)
    payloads = [(ref, n, horizon, seed, r) for r in range(replicates)]
    logger.info("Simulating %d coalescent replicates of size %d", replicates, n)
    return map_replicates(_replicate_task, payloads, threads)


def paths_frame(paths: Sequence[CoalescentPath], with_partitions: bool = True) -> pd.DataFrame:
    """Per-path rows: replicate, jump_time, block_count, partition_text"""
    rows: Dict[str, List[Any]] = {"replicate": [], "jump_time": [], "block_count": [], "partition_text": []}
    for path in paths:
        texts = [p.to_text() for _, p in path.steps] if with_partitions else [""] * len(path)
        for time, count, text in zip(path.times, path.block_counts, texts):
            rows["replicate"].append(path.replicate)
            rows["jump_time"].append(time)
            rows["block_count"].append(count)
            rows["partition_text"].append(text)
    return pd.DataFrame(rows, columns=list(rows))


def tmrca_frame(paths: Sequence[CoalescentPath]) -> pd.DataFrame:
    """One row per replicate: replicate, tmrca (empty when not absorbed)"""
    return pd.DataFrame(
        {
            "replicate": [path.replicate for path in paths],
            "tmrca": [path.times[-1] if path.absorbed else None for path in paths],
        },
        columns=["replicate", "tmrca"],
    )
