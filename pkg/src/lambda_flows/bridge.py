"""
Bridges and discrete-event flows of bridges

A bridge in Kallenberg form F(x) = sum a_i 1{U_i <= x} + (1 - sum a_i) x is
kept with exact rational jump locations, sizes and drift. Every float sampled
by the simulator converts to a Fraction without rounding, and composition and
inversion stay exact, so partitions built from inverse-equality are exact too.
"""

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DomainError, SimulationError
from .log import get_logger
from .measure import LambdaMeasure, dropped_mass
from .models import MeasureState
from .partition import PartitionN, partition_from_labels
from .rng import STREAM_BRIDGE, STREAM_SAMPLES, make_rng

logger = get_logger("bridge")

Real = Union[Fraction, float, int]

DENSITY_GRID_CELLS = 400
DENSITY_GRID_FLOOR = 1e-12


def _exact(x: Real) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class Bridge:
    """Jumps sorted by location (distinct, positive sizes) and the drift 1 - sum of sizes"""

    jumps: Tuple[Tuple[Fraction, Fraction], ...] = ()
    drift: Fraction = Fraction(1)

    @classmethod
    def identity(cls) -> "Bridge":
        return cls()

    @classmethod
    def from_jumps(cls, jumps: Iterable[Tuple[Real, Real]]) -> "Bridge":
        """Builds a bridge from (location, size) pairs; equal locations add up, zero sizes drop"""
        merged: Dict[Fraction, Fraction] = {}
        for location, size in jumps:
            loc, a = _exact(location), _exact(size)
            if loc < 0 or loc > 1:
                raise DomainError(f"Jump location {float(loc)} is outside [0,1]")
            if a < 0:
                raise DomainError(f"Jump size {float(a)} is negative")
            if a:
                merged[loc] = merged.get(loc, Fraction(0)) + a
        total = sum(merged.values(), Fraction(0))
        if total > 1:
            raise DomainError(f"Jump sizes sum to {float(total)} > 1")
        return cls(jumps=tuple(sorted(merged.items())), drift=1 - total)

    @cached_property
    def _locations(self) -> List[Fraction]:
        return [loc for loc, _ in self.jumps]

    @cached_property
    def _cumulative(self) -> List[Fraction]:
        """Sum of sizes of the first k jumps, k = 0..len"""
        out = [Fraction(0)]
        for _, a in self.jumps:
            out.append(out[-1] + a)
        return out

    @cached_property
    def _lefts(self) -> List[Fraction]:
        """F(U_i-) for every jump"""
        return [self.drift * loc + self._cumulative[i] for i, (loc, _) in enumerate(self.jumps)]

    def eval(self, x: Real) -> Fraction:
        """F(x), right-continuous"""
        x = _exact(x)
        k = bisect_right(self._locations, x)
        return self._cumulative[k] + self.drift * x

    def left_limit(self, x: Real) -> Fraction:
        """F(x-), with F(0-) = 0"""
        x = _exact(x)
        k = bisect_left(self._locations, x)
        return self._cumulative[k] + self.drift * x

    def inverse(self, v: Real) -> Fraction:
        """F^-1(v) = inf{x : F(x) > v}; F^-1(1) is 1 with drift, else the last jump location"""
        v = _exact(v)
        if v >= 1:
            if self.drift > 0 or not self.jumps:
                return Fraction(1)
            return self.jumps[-1][0]
        # last jump whose left value F(U_i-) is <= v
        k = bisect_right(self._lefts, v) - 1
        if k >= 0:
            loc, a = self.jumps[k]
            right = self._lefts[k] + a
            if v < right:
                return loc
            return loc + (v - right) / self.drift
        return v / self.drift

    def __call__(self, x: Real) -> Fraction:
        return self.eval(x)

    @property
    def num_jumps(self) -> int:
        return len(self.jumps)

    def is_identity(self) -> bool:
        return not self.jumps


def elementary_bridge(u: Real, location: Real) -> Bridge:
    """x -> u 1{x >= U} + (1 - u) x"""
    a = _exact(u)
    if not 0 < a <= 1:
        raise DomainError(f"Elementary jump size must lie in (0,1], got {float(a)}")
    return Bridge.from_jumps([(location, a)])


def compose(f2: Bridge, f1: Bridge) -> Bridge:
    """Exact Kallenberg form of x -> F2(F1(x))

    Candidate jump locations are the jumps of F1 and the preimages of the jumps
    of F2; the jump of H = F2 o F1 at x is H(x) - H(x-).
    """
    if f1.is_identity():
        return f2
    if f2.is_identity():
        return f1
    candidates = {Fraction(0)}
    candidates.update(loc for loc, _ in f1.jumps)
    candidates.update(f1.inverse(loc) for loc, _ in f2.jumps)
    jumps = []
    for x in sorted(candidates):
        value = f2.eval(f1.eval(x))
        if x == 0:
            before = Fraction(0)
        elif f1.drift > 0:
            before = f2.left_limit(f1.left_limit(x))
        else:
            before = f2.eval(f1.left_limit(x))
        size = value - before
        if size:
            jumps.append((x, size))
    result = Bridge.from_jumps(jumps)
    if result.drift != f1.drift * f2.drift:
        raise SimulationError("Composition lost a jump: drift does not match")
    return result


def partition_from_bridge(f: Bridge, samples: Sequence[Real]) -> PartitionN:
    """i ~ j iff F^-1(V_i) = F^-1(V_j)"""
    return partition_from_labels([f.inverse(v) for v in samples])


def eves_pullback(f: Bridge, eves_t: Sequence[Real]) -> Tuple[PartitionN, List[Fraction]]:
    """Partition of the time-t Eves by common ancestor, and the ancestor of each block"""
    pi = partition_from_bridge(f, eves_t)
    ancestors = [f.inverse(eves_t[block[0] - 1]) for block in pi.blocks]
    return pi, ancestors


def measure_from_bridge(f: Bridge) -> MeasureState:
    """The probability measure whose distribution function is F: jumps become atoms, drift dust"""
    atoms = [(float(loc), float(a)) for loc, a in f.jumps]
    return MeasureState(atoms=atoms, dust=float(f.drift))


def bridge_from_measure(state: MeasureState) -> Bridge:
    """Distribution function of a measure state"""
    return Bridge.from_jumps(state.atoms)


def bridge_to_record(f: Bridge) -> Dict[str, Any]:
    """Exact rational strings, e.g. {"jumps": [["1/2", "1/2"]], "drift": "1/2"}"""
    return {"jumps": [[str(loc), str(a)] for loc, a in f.jumps], "drift": str(f.drift)}


def bridge_from_record(record: Dict[str, Any]) -> Bridge:
    result = Bridge.from_jumps((Fraction(loc), Fraction(a)) for loc, a in record["jumps"])
    if result.drift != Fraction(record["drift"]):
        raise DomainError("Recorded drift does not match the recorded jumps")
    return result


# ---------------------------------------------------------------------------
# flows


class _NuSampler:
    """Draws sizes from nu restricted to [epsilon, 1), normalised

    Atoms are sampled exactly; a density goes through an inverse-CDF table on
    a grid geometric towards both 0 and 1.
    """

    def __init__(self, m: LambdaMeasure, epsilon: float):
        self.atom_sizes = np.array([x for x, _ in m.atoms if x >= epsilon])
        self.atom_rates = np.array([w / (x * x) for x, w in m.atoms if x >= epsilon])
        self.cells = np.zeros(0)
        self.cell_rates = np.zeros(0)
        if m.density is not None:
            lower = epsilon if epsilon > 0.0 else DENSITY_GRID_FLOOR
            half = DENSITY_GRID_CELLS // 2
            towards_zero = np.geomspace(lower, 0.5, half + 1) if lower < 0.5 else np.array([lower])
            towards_one = 1.0 - np.geomspace(0.5, DENSITY_GRID_FLOOR, half + 1)[1:]
            self.cells = np.concatenate([towards_zero, towards_one])
            density = m.density
            self.cell_rates = np.array(
                [density.integrate(lambda u: u ** -2, a, b) for a, b in zip(self.cells, self.cells[1:])]
            )
        self.atom_total = float(self.atom_rates.sum())
        self.density_total = float(self.cell_rates.sum())
        self.rate = self.atom_total + self.density_total

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        out = np.empty(size)
        if size == 0:
            return out
        from_atoms = rng.random(size) * self.rate < self.atom_total
        k_atoms = int(from_atoms.sum())
        if k_atoms:
            out[from_atoms] = rng.choice(self.atom_sizes, size=k_atoms, p=self.atom_rates / self.atom_total)
        k_density = size - k_atoms
        if k_density:
            cumulative = np.cumsum(self.cell_rates)
            picks = np.searchsorted(cumulative, rng.random(k_density) * cumulative[-1], side="right")
            picks = np.minimum(picks, len(self.cell_rates) - 1)
            lo, hi = self.cells[picks], self.cells[picks + 1]
            out[~from_atoms] = lo + (hi - lo) * rng.random(k_density)
        return out


@dataclass(frozen=True)
class BridgeFlowEvents:
    """Poissonian flow of bridges on a window: elementary events (t, u, U)"""

    window: Tuple[float, float]
    events: Tuple[Tuple[float, float, float], ...]
    epsilon: float = 0.0
    dropped_mass: float = 0.0
    seed: Optional[int] = None
    label: str = ""

    def __post_init__(self) -> None:
        s0, s1 = self.window
        if s1 < s0:
            raise DomainError(f"Window end {s1} precedes its start {s0}")
        previous = s0
        for t, u, location in self.events:
            if not previous < t <= s1:
                raise DomainError("Event times must be strictly increasing inside the window")
            if not self.epsilon <= u < 1.0 or u <= 0.0:
                raise DomainError(f"Event size {u} is outside [epsilon, 1)")
            if not 0.0 <= location <= 1.0:
                raise DomainError(f"Event location {location} is outside [0,1]")
            previous = t

    @cached_property
    def _times(self) -> List[float]:
        return [t for t, _, _ in self.events]

    def events_between(self, s: float, t: float) -> Tuple[Tuple[float, float, float], ...]:
        """Events with s < time <= t"""
        s0, s1 = self.window
        if not s0 <= s <= t <= s1:
            raise DomainError(f"Interval ({s}, {t}] is not inside the window {self.window}")
        return self.events[bisect_right(self._times, s):bisect_right(self._times, t)]

    def bridge(self, s: float, t: float) -> Bridge:
        """F_{s,t}: elementary bridges of (s,t] composed in time order"""
        acc = Bridge.identity()
        for _, u, location in self.events_between(s, t):
            acc = compose(elementary_bridge(u, location), acc)
        return acc

    def measure(self, s: float, t: float) -> MeasureState:
        """rho_{s,t}, the measure with distribution function F_{s,t}"""
        return measure_from_bridge(self.bridge(s, t))

    def to_records(self) -> List[Dict[str, float]]:
        return [{"t": t, "u": u, "U": location} for t, u, location in self.events]

    @classmethod
    def from_records(
        cls, meta: Dict[str, Any], records: Sequence[Dict[str, Any]]
    ) -> "BridgeFlowEvents":
        window = meta.get("window")
        if window is None:
            raise DomainError("Bridge event file carries no window")
        return cls(
            window=(float(window[0]), float(window[1])),
            events=tuple((float(r["t"]), float(r["u"]), float(r["U"])) for r in records),
            epsilon=float(meta.get("epsilon", 0.0)),
            dropped_mass=float(meta.get("dropped_mass", 0.0)),
            seed=meta.get("seed"),
            label=str(meta.get("label", "")),
        )


def simulate_bridge_flow(
    m: LambdaMeasure,
    window: Tuple[float, float],
    epsilon: float = 0.0,
    seed: int = 0,
    replicate: int = 0,
    rng: Optional[np.random.Generator] = None,
) -> BridgeFlowEvents:
    """
    Poisson events of rate nu([epsilon, 1)) on the window

    Args:
        m: Lambda measure without a Kingman component
        window: (s0, s1)
        epsilon: Truncation; 0 only when nu is finite
        seed: Root seed
        replicate: Replicate index
        rng: Generator to use instead of the seeded stream

    Returns:
        BridgeFlowEvents recording epsilon and the dropped mass
    """
    if m.kingman_mass > 0.0:
        raise DomainError(
            "Lambda({0}) > 0 has no elementary-bridge representation; use the lookdown graph"
        )
    s0, s1 = window
    if s1 < s0:
        raise DomainError(f"Window end {s1} precedes its start {s0}")
    if epsilon < 0.0 or epsilon >= 1.0:
        raise DomainError(f"Truncation must lie in [0,1), got {epsilon}")
    if epsilon == 0.0 and m.density is not None:
        report = m.classify().integral_report["nu_mass"]
        if report.divergent is not False:
            raise DomainError(f"nu has infinite mass for {m.label}; a truncation epsilon > 0 is required")
    if rng is None:
        rng = make_rng(seed, replicate, STREAM_BRIDGE)

    sampler = m._cache.get(("nu_sampler", epsilon))
    if sampler is None:
        sampler = _NuSampler(m, epsilon)
        m._cache[("nu_sampler", epsilon)] = sampler
    lost = dropped_mass(m, epsilon)
    if lost > 0.0:
        logger.warning("Truncation at epsilon=%g drops int_0^eps u nu(du) = %g", epsilon, lost)

    count = int(rng.poisson(sampler.rate * (s1 - s0))) if s1 > s0 else 0
    times = np.sort(rng.uniform(s0, s1, count))
    for i in range(count):
        floor = times[i - 1] if i else s0
        if times[i] <= floor:
            times[i] = np.nextafter(floor, math.inf)
            logger.warning("Tied bridge event time perturbed by one ulp")
    sizes = sampler.sample(rng, count)
    locations = rng.random(count)
    events = tuple((float(t), float(u), float(x)) for t, u, x in zip(times, sizes, locations))
    return BridgeFlowEvents(
        window=(float(s0), float(s1)),
        events=events,
        epsilon=epsilon,
        dropped_mass=lost,
        seed=seed,
        label=m.label,
    )


def sample_points(n: int, seed: int = 0, replicate: int = 0) -> List[float]:
    """n i.i.d. uniform points V_1..V_n from the samples stream"""
    return [float(v) for v in make_rng(seed, replicate, STREAM_SAMPLES).random(n)]
