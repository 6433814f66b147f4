"""
Lambda Fleming-Viot from the lookdown representation

The measure at time t puts mass |block i|/n on the initial type of level i for
every non-singleton block of the flow of partitions, and the singleton
fraction is dust. The Eves are the initial types of levels 1, 2, ... ranked
either by extinction (CDI) or by the persistent overwhelming-mass criterion.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, SimulationError
from .log import get_logger
from .measure import LambdaMeasure
from .models import (
    EveCase,
    EveRank,
    EveReport,
    MeasureSpec,
    MeasureState,
    Regime,
    RegimeDiagnostics,
    TieReport,
)
from .lookdown import LookdownGraphN, flow_partition, measure_from_partition, sample_graph, source_indices
from .partition import PartitionN
from .rng import STREAM_GRAPH, STREAM_TYPES, make_rng

logger = get_logger("flemingviot")

DEFAULT_THETA = 0.99
LISTED_EVES = 10


@dataclass
class FvRun:
    """One Fleming-Viot run on n levels

    ``event_times``, ``level_one_mass`` and ``atom_counts`` are recorded at
    every event even when the full ``path`` is not.
    """

    n: int
    graph: LookdownGraphN
    initial_types: Tuple[float, ...]
    regime: Regime
    u_log_u_finite: Optional[bool] = None
    measure: Optional[MeasureSpec] = None
    seed: Optional[int] = None
    replicate: int = 0
    path: List[Tuple[float, MeasureState]] = field(default_factory=list)
    event_times: List[float] = field(default_factory=list)
    level_one_mass: List[float] = field(default_factory=list)
    atom_counts: List[int] = field(default_factory=list)
    extinction_times: Dict[int, Optional[float]] = field(default_factory=dict)
    emergence_times: Dict[int, float] = field(default_factory=dict)
    fixation_time: Optional[float] = None
    final_counts: Tuple[int, ...] = ()

    @property
    def horizon(self) -> float:
        return self.graph.window[1]

    @property
    def fixed(self) -> bool:
        return self.fixation_time is not None

    def state_at(self, t: float) -> MeasureState:
        """Recorded state in force at t"""
        if not self.path:
            raise SimulationError("Run was simulated without recording its path")
        times = [time for time, _ in self.path]
        k = int(np.searchsorted(times, t, side="right")) - 1
        if k < 0:
            raise DomainError(f"Time {t} precedes the start of the run")
        return self.path[k][1]

    @property
    def final_state(self) -> MeasureState:
        return _state_from_counts(np.asarray(self.final_counts), self.initial_types)


def _state_from_counts(counts: np.ndarray, types: Sequence[float]) -> MeasureState:
    n = int(counts.sum())
    wide = np.flatnonzero(counts > 1)
    atoms = [(float(types[i]), int(counts[i]) / n) for i in wide]
    return MeasureState.model_construct(atoms=atoms, dust=int((counts == 1).sum()) / n)


class _FvEngine:
    """Pushes ancestor labels through the graph event by event"""

    def __init__(self, m: LambdaMeasure, run: FvRun, rng: np.random.Generator, record_path: bool):
        self.m = m
        self.run = run
        self.rng = rng
        self.record_path = record_path
        n = run.n
        self.labels = np.arange(n)
        self.alive = n
        self.position = 0
        run.extinction_times = {i: None for i in range(1, n + 1)}
        if record_path:
            run.path.append((run.graph.window[0], _state_from_counts(np.ones(n, dtype=int), run.initial_types)))

    def consume(self) -> None:
        run = self.run
        n = run.n
        for event in run.graph.events[self.position:]:
            self.labels = self.labels[source_indices(n, event.levels)]
            counts = np.bincount(self.labels, minlength=n)
            now = int(self.labels.max()) + 1
            for i in range(now + 1, self.alive + 1):
                run.extinction_times[i] = event.time
            self.alive = now
            ancestor = int(self.labels[event.levels[0] - 1])
            if ancestor + 1 not in run.emergence_times:
                run.emergence_times[ancestor + 1] = event.time
            run.event_times.append(event.time)
            run.level_one_mass.append(counts[0] / n if counts[0] > 1 else 0.0)
            run.atom_counts.append(int((counts > 1).sum()))
            if self.record_path:
                run.path.append((event.time, _state_from_counts(counts, run.initial_types)))
            if now == 1 and run.fixation_time is None:
                run.fixation_time = event.time
        self.position = len(run.graph.events)
        run.final_counts = tuple(int(c) for c in np.bincount(self.labels, minlength=n))

    def advance(self, until: float) -> None:
        """Extends the graph to ``until`` and consumes the new events"""
        if until > self.run.horizon:
            self.run.graph = self.run.graph.extended(self.m, until, self.rng)
        self.consume()


def simulate_fv(
    m: LambdaMeasure,
    n: int,
    window: Tuple[float, float] = (0.0, 1.0),
    seed: int = 0,
    replicate: int = 0,
    initial_types: Optional[Sequence[float]] = None,
    until_fixation: bool = False,
    max_time: float = 1e3,
    record_path: bool = True,
    graph: Optional[LookdownGraphN] = None,
) -> FvRun:
    """
    Simulate the Lambda Fleming-Viot path on n levels

    Args:
        m: Lambda measure
        n: Number of levels
        window: (s0, s1); with until_fixation, only the first chunk
        seed: Root seed
        replicate: Replicate index
        initial_types: Distinct types of levels 1..n (default i.i.d. uniform)
        until_fixation: Keep doubling the horizon until a single type remains
        max_time: Cap for until_fixation
        record_path: Keep the MeasureState after every event
        graph: Replay this graph instead of sampling one

    Returns:
        FvRun
    """
    engine = _start(m, n, window, seed, replicate, initial_types, record_path, graph)
    run = engine.run
    chunk = max(run.graph.window[1] - run.graph.window[0], 1.0)
    while until_fixation and not run.fixed and run.horizon < max_time:
        target = min(run.horizon + chunk, max_time)
        logger.debug("Extending run to %g (%d events so far)", target, len(run.graph))
        engine.advance(target)
        chunk *= 2.0
    if until_fixation and not run.fixed:
        logger.warning("No fixation before max_time=%g on %d levels", max_time, n)
    return run


def draw_initial_types(n: int, seed: int = 0, replicate: int = 0) -> Tuple[float, ...]:
    """I.i.d. uniform types of levels 1..n from the types stream of (seed, replicate)"""
    return tuple(float(x) for x in make_rng(seed, replicate, STREAM_TYPES).random(n))


def _start(
    m: LambdaMeasure,
    n: int,
    window: Tuple[float, float],
    seed: int,
    replicate: int,
    initial_types: Optional[Sequence[float]],
    record_path: bool,
    graph: Optional[LookdownGraphN],
) -> _FvEngine:
    regime_class = m.classify()
    rng_graph = make_rng(seed, replicate, STREAM_GRAPH)
    if initial_types is None:
        types = draw_initial_types(n, seed, replicate)
    else:
        types = tuple(float(x) for x in initial_types)
    if len(types) != n:
        raise DomainError(f"Got {len(types)} initial types for {n} levels")
    if len(set(types)) != n:
        raise DomainError("Initial types must be distinct")
    if graph is None:
        graph = sample_graph(m, n, window, seed=seed, replicate=replicate, rng=rng_graph)
    elif graph.n != n:
        raise DomainError(f"Graph has {graph.n} levels, expected {n}")

    run = FvRun(
        n=n,
        graph=graph,
        initial_types=types,
        regime=regime_class.regime,
        u_log_u_finite=regime_class.u_log_u_finite,
        measure=m.spec,
        seed=seed,
        replicate=replicate,
    )
    engine = _FvEngine(m, run, rng_graph, record_path)
    engine.consume()
    return engine


def extract_eves(run: FvRun, theta: float = DEFAULT_THETA) -> EveReport:
    """Eves of a run, ranked by extinction order (CDI) or greedily by the mass ratio at the horizon"""
    if run.regime == Regime.UNDECIDED:
        raise DomainError("Cannot extract Eves for an undecided regime")
    if run.regime == Regime.CDI:
        return _extinction_eves(run)
    return _persistent_eves(run, theta)


def _extinction_eves(run: FvRun) -> EveReport:
    times = run.extinction_times
    ties = _tie_groups(times)
    tied = {i for group in ties for i in group}

    def death(i: int) -> float:
        value = times.get(i)
        return math.inf if value is None else value

    resolved = 0
    for i in range(1, run.n):
        if death(i + 1) < math.inf and death(i) > death(i + 1):
            resolved = i
        else:
            break
    if resolved == run.n - 1:
        # the top rank has nothing left to be compared with
        resolved = run.n
    eves = []
    for i in range(1, run.n + 1):
        if i in tied:
            break
        eves.append(EveRank(rank=i, location=run.initial_types[i - 1], ancestor=i, evidence=times.get(i)))
    return EveReport(
        regime_case=EveCase.EXTINCTION,
        ordered_eves=eves,
        resolved_upto=resolved,
        ties=ties,
        diagnostics={"fixation_time": run.fixation_time, "horizon": run.horizon},
    )


def _persistent_eves(run: FvRun, theta: float) -> EveReport:
    n = run.n
    counts = np.asarray(run.final_counts)
    masses = np.where(counts > 1, counts / n, 0.0)
    # the largest remaining mass maximizes mass / rest; ties go to the lower level
    order = [int(i) for i in np.argsort(-masses, kind="stable") if masses[i] > 0.0]
    eves = []
    resolved = 0
    removed = 0.0
    certified = True
    for rank, index in enumerate(order, start=1):
        rest = 1.0 - removed
        if rest <= 0.0:
            break
        ratio = min(float(masses[index] / rest), 1.0)
        if certified and ratio >= theta:
            resolved = rank
        else:
            certified = False
        if len(eves) < max(LISTED_EVES, resolved + 1):
            eves.append(EveRank(rank=rank, location=run.initial_types[index], ancestor=index + 1, evidence=ratio))
        removed += float(masses[index])
    return EveReport(
        regime_case=EveCase.PERSISTENT,
        ordered_eves=eves,
        resolved_upto=resolved,
        diagnostics={
            "horizon": run.horizon,
            "theta": theta,
            "mass_order_agrees": [eve.ancestor for eve in eves[:resolved]] == list(range(1, resolved + 1)),
        },
    )


def _tie_groups(times: Dict[int, Optional[float]]) -> List[List[int]]:
    grouped: Dict[float, List[int]] = {}
    for i, t in times.items():
        if t is not None:
            grouped.setdefault(t, []).append(i)
    return [sorted(group) for _, group in sorted(grouped.items()) if len(group) > 1]


def detect_simultaneous_extinction(run: FvRun) -> TieReport:
    """Event times at which two or more initial types die out together"""
    if run.regime != Regime.CDI:
        raise DomainError(f"Simultaneous extinction is a CDI question; run is {run.regime.value}")
    groups = _tie_groups(run.extinction_times)
    return TieReport(
        tie_times=[run.extinction_times[group[0]] for group in groups],  # type: ignore[misc]
        tie_groups=groups,
    )


def _default_grid(run: FvRun, points: int = 10) -> List[float]:
    s0, s1 = run.graph.window
    return [s0 + (s1 - s0) * k / points for k in range(points)]


def regime_diagnostics(
    run: FvRun, t_grid: Optional[Sequence[float]] = None, cutoff: Optional[int] = None
) -> RegimeDiagnostics:
    """
    Regime-specific evidence from a run

    DISCRETE: positive jumps of X_t = 1 - rho_t({e}), e the primitive Eve.
    INTENSIVE_W_DUST: levels in [cutoff] never chosen as a parent (u log u
    finite), types in [cutoff] that never reproduced, and the fraction of
    initial types that ever reach positive frequency. Level n is never the
    least level of an event and type n never leaves it, so cutoff is at most
    n - 1 (the default).
    """
    if run.regime == Regime.DISCRETE:
        grid = list(t_grid) if t_grid is not None else _default_grid(run)
        mass = np.concatenate([[0.0], np.asarray(run.level_one_mass)])
        times = np.asarray(run.event_times)
        up = np.diff(1.0 - mass) > 0.0
        jump_times = times[up]
        return RegimeDiagnostics(
            regime=run.regime,
            last_positive_jump_time=float(jump_times[-1]) if len(jump_times) else None,
            positive_jumps_after={repr(float(t)): int((jump_times > t).sum()) for t in grid},
        )
    if run.regime == Regime.INTENSIVE_W_DUST:
        fraction = len(run.emergence_times) / run.n
        if not run.u_log_u_finite:
            return RegimeDiagnostics(regime=run.regime, positive_frequency_fraction=fraction)
        k = run.n - 1 if cutoff is None else cutoff
        if not 1 <= k < run.n:
            raise DomainError(f"Cutoff must lie in [1, {run.n - 1}], got {k}")
        parents = {event.parent for event in run.graph.events if event.parent <= k}
        reproduced = {i for i in run.emergence_times if i <= k}
        return RegimeDiagnostics(
            regime=run.regime,
            never_parent_levels=k - len(parents),
            never_reproduced_types=k - len(reproduced),
            positive_frequency_fraction=fraction,
        )
    raise DomainError(f"No regime diagnostics for {run.regime.value}")


def cdi_diagnostics(run: FvRun) -> RegimeDiagnostics:
    """Largest relative drop (#rho_{t-} - #rho_t) / #rho_t of the atom count along a CDI run"""
    if run.regime != Regime.CDI:
        raise DomainError(f"Atom-drop diagnostic applies to CDI runs; run is {run.regime.value}")
    worst = 0.0
    previous = 0
    for count in run.atom_counts:
        if count > 0 and previous > count:
            worst = max(worst, (previous - count) / count)
        previous = count
    return RegimeDiagnostics(regime=run.regime, max_relative_atom_drop=worst)


def simulate_fv_adaptive(
    m: LambdaMeasure,
    n: int,
    seed: int = 0,
    replicate: int = 0,
    horizon: float = 1.0,
    theta: float = DEFAULT_THETA,
    max_time: float = 1e3,
    record_path: bool = False,
) -> Tuple[FvRun, EveReport]:
    """Doubles the horizon until resolved_upto stops changing (or fixation, or max_time)"""
    if horizon <= 0.0:
        raise DomainError(f"Initial horizon must be positive, got {horizon}")
    engine = _start(m, n, (0.0, min(horizon, max_time)), seed, replicate, None, record_path, None)
    run = engine.run
    report = extract_eves(run, theta)
    while not run.fixed and run.horizon < max_time:
        engine.advance(min(2.0 * run.horizon, max_time))
        updated = extract_eves(run, theta)
        stable = updated.resolved_upto == report.resolved_upto and updated.resolved_upto > 0
        report = updated
        if stable:
            break
    logger.debug("Adaptive horizon stopped at %g with resolved_upto=%d", run.horizon, report.resolved_upto)
    return run, report


def decompose_run(run: FvRun) -> Tuple[List[Tuple[float, PartitionN]], Tuple[float, ...]]:
    """The run as (flow of partitions from the start, Eves); the Eves are the initial types"""
    s0 = run.graph.window[0]
    times = [s0] + [event.time for event in run.graph.events]
    flows = [(t, flow_partition(run.graph, s0, t)) for t in times]
    return flows, run.initial_types


def recompose_path(
    flows: Sequence[Tuple[float, PartitionN]], eves: Sequence[float]
) -> List[Tuple[float, MeasureState]]:
    """Rebuilds the measure path from a flow of partitions and the Eves"""
    return [(t, measure_from_partition(pi, eves)) for t, pi in flows]
