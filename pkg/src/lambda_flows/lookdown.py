"""
Lookdown graph on n levels

Reproduction events (time, level set I) restricted to [n]. The parent is the
lowest participating level; levels in I take its type and every other level i
takes the type previously carried at i - max(|I n [i]| - 1, 0), which pushes
the old types up and off the top level. Folding events with Coag gives the
flow of partitions, whose block i collects the levels descending from level i.
"""

import math
from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .errors import DomainError, ReconstructionError, SimulationError
from .log import get_logger
from .measure import LambdaMeasure, merger_weights
from .models import MeasureSpec, MeasureState
from .partition import (
    PartitionN,
    coag,
    encode_single_block,
    identity_partition,
)
from .rng import STREAM_GRAPH, make_rng, sample_subset

logger = get_logger("lookdown")


class Absorbed(Enum):
    """Finite-n stand-in for a lowest level at infinity"""

    ABSORBED = "ABSORBED"

    def __repr__(self) -> str:
        return "ABSORBED"


ABSORBED = Absorbed.ABSORBED


@dataclass(frozen=True)
class ReproductionEvent:
    time: float
    levels: Tuple[int, ...]

    def __post_init__(self) -> None:
        levels = tuple(sorted(set(self.levels)))
        if len(levels) < 2:
            raise DomainError(f"A reproduction event needs at least two levels, got {self.levels}")
        if levels[0] < 1:
            raise DomainError(f"Levels are positive integers, got {self.levels}")
        object.__setattr__(self, "levels", levels)

    @property
    def parent(self) -> int:
        return self.levels[0]


@dataclass(frozen=True)
class ParticleState:
    """Types carried by levels 1..n"""

    types: Tuple[Any, ...]

    def __len__(self) -> int:
        return len(self.types)


@dataclass(frozen=True)
class LookdownGraphN:
    """Strictly time-ordered reproduction events on n levels over a window (s0, s1]"""

    n: int
    window: Tuple[float, float]
    events: Tuple[ReproductionEvent, ...] = ()
    seed: Optional[int] = None
    measure: Optional[MeasureSpec] = None
    label: str = ""

    def __post_init__(self) -> None:
        s0, s1 = self.window
        if self.n < 2:
            raise DomainError(f"A lookdown graph needs n >= 2, got {self.n}")
        if s1 < s0:
            raise DomainError(f"Window end {s1} precedes its start {s0}")
        previous = s0
        for event in self.events:
            if not previous < event.time <= s1:
                raise DomainError(f"Event at {event.time} breaks strict time order inside {self.window}")
            if event.levels[-1] > self.n:
                raise DomainError(f"Event levels {event.levels} exceed n={self.n}")
            previous = event.time

    @cached_property
    def times(self) -> List[float]:
        return [event.time for event in self.events]

    def __len__(self) -> int:
        return len(self.events)

    def _check_time(self, t: float) -> None:
        s0, s1 = self.window
        if not s0 <= t <= s1:
            raise DomainError(f"Time {t} lies outside the window {self.window}")

    def events_between(self, s: float, t: float) -> Tuple[ReproductionEvent, ...]:
        """Events with s < time <= t"""
        self._check_time(s)
        self._check_time(t)
        if t < s:
            raise DomainError(f"Interval end {t} precedes its start {s}")
        return self.events[bisect_right(self.times, s):bisect_right(self.times, t)]

    def extended(self, m: LambdaMeasure, until: float, rng: np.random.Generator) -> "LookdownGraphN":
        """The same graph with independent events added on (s1, until]"""
        s0, s1 = self.window
        if until < s1:
            raise DomainError(f"Cannot extend a window ending at {s1} back to {until}")
        extra = _sample_events(m, self.n, s1, until, rng)
        return LookdownGraphN(
            n=self.n,
            window=(s0, until),
            events=self.events + extra,
            seed=self.seed,
            measure=self.measure,
            label=self.label,
        )

    def to_records(self) -> List[Dict[str, Any]]:
        return [{"t": e.time, "levels": list(e.levels)} for e in self.events]

    @classmethod
    def from_records(cls, meta: Dict[str, Any], records: Sequence[Dict[str, Any]]) -> "LookdownGraphN":
        try:
            window = meta["window"]
            measure = meta.get("measure")
            return cls(
                n=int(meta["n"]),
                window=(float(window[0]), float(window[1])),
                events=tuple(ReproductionEvent(float(r["t"]), tuple(r["levels"])) for r in records),
                seed=meta.get("seed"),
                measure=MeasureSpec.model_validate(measure) if measure else None,
                label=str(meta.get("label", "")),
            )
        except (KeyError, TypeError, IndexError) as exc:
            raise DomainError(f"Malformed graph records: {exc}")


def _sample_events(
    m: LambdaMeasure, n: int, s0: float, s1: float, rng: np.random.Generator
) -> Tuple[ReproductionEvent, ...]:
    weights = merger_weights(m, n)
    total = float(weights.sum())
    if total <= 0.0:
        logger.warning("Total reproduction rate vanishes on %d levels; graph is empty", n)
        return ()
    if s1 <= s0:
        return ()
    count = int(rng.poisson(total * (s1 - s0)))
    times = np.sort(rng.uniform(s0, s1, count))
    sizes = rng.choice(np.arange(2, n + 1), size=count, p=weights / total)
    events = []
    previous = s0
    for t, p in zip(times, sizes):
        if t <= previous:
            t = np.nextafter(previous, math.inf)
            logger.warning("Tied event time perturbed by one ulp")
        levels = tuple(i + 1 for i in sample_subset(rng, n, int(p)))
        events.append(ReproductionEvent(float(t), levels))
        previous = t
    return tuple(events)


def sample_graph(
    m: LambdaMeasure,
    n: int,
    window: Tuple[float, float],
    seed: int = 0,
    replicate: int = 0,
    rng: Optional[np.random.Generator] = None,
) -> LookdownGraphN:
    """
    Sample the lookdown graph restricted to [n]

    Events arrive at rate R(n) = sum_p C(n,p) lambda_{n,p}; each picks p with
    probability C(n,p) lambda_{n,p} / R(n) and a uniform p-subset of levels.
    """
    if n < 2:
        raise DomainError(f"A lookdown graph needs n >= 2, got {n}")
    s0, s1 = window
    if s1 < s0:
        raise DomainError(f"Window end {s1} precedes its start {s0}")
    if rng is None:
        rng = make_rng(seed, replicate, STREAM_GRAPH)
    events = _sample_events(m, n, float(s0), float(s1), rng)
    return LookdownGraphN(
        n=n,
        window=(float(s0), float(s1)),
        events=events,
        seed=seed,
        measure=m.spec,
        label=m.label,
    )


def source_indices(n: int, levels: Sequence[int]) -> np.ndarray:
    """0-based index each level copies from across an event on levels I"""
    chosen = np.asarray(levels)
    index = np.arange(1, n + 1)
    below = np.searchsorted(chosen, index, side="right")
    src = index - np.maximum(below - 1, 0)
    src[chosen - 1] = chosen[0]
    return src - 1


def apply_event(
    state: Union[ParticleState, Sequence[Any]], levels: Iterable[int]
) -> ParticleState:
    """Types after one reproduction event on the level set I"""
    types = state.types if isinstance(state, ParticleState) else tuple(state)
    chosen = sorted(set(levels))
    if len(chosen) < 2 or chosen[0] < 1 or chosen[-1] > len(types):
        raise DomainError(f"Level set {chosen} is not valid for {len(types)} levels")
    src = source_indices(len(types), chosen)
    return ParticleState(types=tuple(types[j] for j in src))


def flow_partition(g: LookdownGraphN, s: float, t: float) -> PartitionN:
    """Partition of the levels at t by ancestral level at s"""
    acc = identity_partition(g.n)
    for event in g.events_between(s, t):
        acc = coag(encode_single_block(event.levels, g.n), acc)
    return acc


def ancestor_levels(g: LookdownGraphN, s: float, t: float) -> np.ndarray:
    """For each level at t (index level-1), its ancestral level at s"""
    labels = np.arange(1, g.n + 1)
    for event in g.events_between(s, t):
        labels = labels[source_indices(g.n, event.levels)]
    return labels


def evolve(g: LookdownGraphN, initial: Union[ParticleState, Sequence[Any]], t: float) -> ParticleState:
    """Particle types at time t started from the window start"""
    state = initial if isinstance(initial, ParticleState) else ParticleState(tuple(initial))
    if len(state) != g.n:
        raise DomainError(f"Initial state has {len(state)} types for {g.n} levels")
    labels = ancestor_levels(g, g.window[0], t)
    return ParticleState(types=tuple(state.types[j - 1] for j in labels))


def lowest_level(g: LookdownGraphN, i: int, t: float) -> Union[int, Absorbed]:
    """Lowest level at t carrying the type of level i at the window start"""
    if not 1 <= i <= g.n:
        raise DomainError(f"Level {i} is outside [1, {g.n}]")
    pi = flow_partition(g, g.window[0], t)
    if i > pi.num_blocks:
        return ABSORBED
    return pi.blocks[i - 1][0]


def extinction_times(g: LookdownGraphN) -> Dict[int, Optional[float]]:
    """Time at which the descent of each initial level leaves [n] (None if it survives)"""
    out: Dict[int, Optional[float]] = {i: None for i in range(1, g.n + 1)}
    labels = np.arange(1, g.n + 1)
    alive = g.n
    for event in g.events:
        labels = labels[source_indices(g.n, event.levels)]
        # survivors always form a prefix 1..k of the initial levels
        now = int(labels.max())
        for i in range(now + 1, alive + 1):
            out[i] = event.time
        alive = now
    return out


def empirical_measure(
    g: LookdownGraphN, initial_types: Sequence[float], s: float, t: float
) -> MeasureState:
    """Atoms |block i|/n at the type of level i for non-singleton blocks; singletons are dust"""
    if len(initial_types) != g.n:
        raise DomainError(f"Got {len(initial_types)} initial types for {g.n} levels")
    if len(set(initial_types)) != len(initial_types):
        raise DomainError("Initial types must be distinct")
    pi = flow_partition(g, s, t)
    return measure_from_partition(pi, initial_types)


def measure_from_partition(pi: PartitionN, types: Sequence[float]) -> MeasureState:
    """sum over non-singleton blocks of |block i|/n at type i, plus dust for the singletons"""
    atoms = [(float(types[i]), len(block) / pi.n) for i, block in enumerate(pi.blocks) if len(block) > 1]
    singletons = sum(1 for block in pi.blocks if len(block) == 1)
    return MeasureState.model_construct(atoms=atoms, dust=singletons / pi.n)


def reconstruct_event(before: PartitionN, after: PartitionN) -> Tuple[int, ...]:
    """
    The level set I with before = Coag(after, 1_I)

    Indices beyond the block count of ``after`` refer to absorbed blocks and
    cannot be seen; the smallest such I is returned.
    """
    if before.n != after.n:
        raise ReconstructionError(f"Partitions of [{before.n}] and [{after.n}] cannot be related")
    index_of = after.block_indices()
    merged = []
    for block in before.blocks:
        indices = sorted({index_of[i - 1] for i in block})
        if len(indices) > 1:
            merged.append(tuple(indices))
    if not merged:
        raise ReconstructionError("No merge between the two partitions")
    if len(merged) > 1:
        raise ReconstructionError(f"{len(merged)} merged groups; not a single reproduction event")
    candidate = merged[0]
    if coag(after, encode_single_block(candidate, after.n)) != before:
        raise ReconstructionError("Before is not a coagulation of after by a single block")
    return candidate


def graph_meta(g: LookdownGraphN) -> Dict[str, Any]:
    return {
        "n": g.n,
        "window": list(g.window),
        "seed": g.seed,
        "measure": g.measure.model_dump(mode="json", exclude_none=True) if g.measure else None,
        "label": g.label,
    }


def trajectory_frame(g: LookdownGraphN, initial: Sequence[float]) -> pd.DataFrame:
    """Rows (time, level, type) at the window start and after every event"""
    types = np.asarray(initial, dtype=float)
    if len(types) != g.n:
        raise SimulationError(f"Initial state has {len(types)} types for {g.n} levels")
    times = [g.window[0]]
    snapshots = [types]
    for event in g.events:
        types = types[source_indices(g.n, event.levels)]
        times.append(event.time)
        snapshots.append(types)
    levels = np.tile(np.arange(1, g.n + 1), len(times))
    return pd.DataFrame(
        {
            "time": np.repeat(times, g.n),
            "level": levels,
            "type": np.concatenate(snapshots) if snapshots else np.zeros(0),
        },
        columns=["time", "level", "type"],
    )
