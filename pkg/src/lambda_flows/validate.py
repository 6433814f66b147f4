"""
Validation harness

Statistical and exact checks that tie the simulators to each other and to
closed-form laws. Every check returns a TestReport whose verdict depends only
on (parameters, seed). UNDECIDED is returned when the sample is too small for
the configured power, never as a soft failure.
"""

import hashlib
import math
from collections import Counter
from itertools import combinations
from typing import Any, Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special, stats

from .bridge import partition_from_bridge, sample_points, simulate_bridge_flow
from .coalescent import block_count_curve, partition_at, simulate_coalescent
from .errors import DomainError, ReconstructionError
from .flemingviot import extract_eves, simulate_fv
from .log import get_logger
from .lookdown import LookdownGraphN, flow_partition, reconstruct_event, sample_graph
from .measure import LambdaMeasure, cdi_speed, lambda_rate, make_measure, merger_weights, psi_tail
from .models import Regime, RunConfig, TestReport, ValidationThresholds, Verdict
from .parallel import MeasureRef, map_replicates, measure_ref, resolve_measure
from .partition import PartitionN, coag, identity_partition, parse_partition, partition_from_labels, relabel
from .rng import STREAM_SAMPLES, make_rng

logger = get_logger("validate")

SHAPE_N = 4
RATE_MAX_N = 6
COCYCLE_MAX_TRIPLES = 200
SPEED_MIN_BLOCKS = 10.0


def derive_seed(seed: int, test_id: str) -> int:
    """Independent 64-bit seed for one test of a suite"""
    digest = hashlib.sha256(f"{seed}:{test_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def tv_distance(left: Iterable[Hashable], right: Iterable[Hashable]) -> float:
    """Total-variation distance between two empirical distributions"""
    a, b = Counter(left), Counter(right)
    na, nb = sum(a.values()), sum(b.values())
    if na == 0 or nb == 0:
        raise DomainError("Total variation needs two non-empty samples")
    return 0.5 * math.fsum(abs(a[k] / na - b[k] / nb) for k in set(a) | set(b))


def tv_threshold(thresholds: ValidationThresholds, cells: int, samples: int) -> float:
    """tv_max, widened to the sampling-noise floor se_multiplier * sqrt(cells / (pi * samples))"""
    floor = thresholds.se_multiplier * math.sqrt(max(cells, 1) / (math.pi * max(samples, 1)))
    return max(thresholds.tv_max, floor)


def _underpowered(samples: int, thresholds: ValidationThresholds) -> bool:
    return samples < thresholds.min_replicates


# ---------------------------------------------------------------------------
# replicate tasks


def _rate_task(payload: Tuple[MeasureRef, int, float, int, int]) -> List[int]:
    ref, n, length, seed, replicate = payload
    g = sample_graph(resolve_measure(ref), n, (0.0, length), seed=seed, replicate=replicate)
    counts = [0] * (n + 1)
    for event in g.events:
        counts[len(event.levels)] += 1
    return counts


def _chain_count_task(payload: Tuple[MeasureRef, int, float, int, int]) -> int:
    ref, n, t, seed, replicate = payload
    path = simulate_coalescent(resolve_measure(ref), n, horizon=t, seed=seed, replicate=replicate)
    return block_count_curve(path, [t])[0]


def _bridge_count_task(payload: Tuple[MeasureRef, int, float, int, int]) -> int:
    ref, n, t, seed, replicate = payload
    flow = simulate_bridge_flow(resolve_measure(ref), (0.0, t), 0.0, seed=seed, replicate=replicate)
    return partition_from_bridge(flow.bridge(0.0, t), sample_points(n, seed, replicate)).num_blocks


def _lookdown_count_task(payload: Tuple[MeasureRef, int, float, int, int]) -> int:
    ref, n, t, seed, replicate = payload
    g = sample_graph(resolve_measure(ref), n, (0.0, t), seed=seed, replicate=replicate)
    return flow_partition(g, 0.0, t).num_blocks


def _shape_task(payload: Tuple[str, MeasureRef, int, float, int, int]) -> str:
    source, ref, n, t, seed, replicate = payload
    m = resolve_measure(ref)
    if source == "lookdown":
        g = sample_graph(m, n, (0.0, t), seed=seed, replicate=replicate)
        return flow_partition(g, 0.0, t).to_text()
    pi = partition_at(simulate_coalescent(m, n, horizon=t, seed=seed, replicate=replicate), t)
    if source == "biased":
        pi = _bias_towards_first_levels(pi, make_rng(seed, replicate, STREAM_SAMPLES))
    return pi.to_text()


def _bias_towards_first_levels(pi: PartitionN, rng: np.random.Generator) -> PartitionN:
    """Merges the blocks of 1 and 2 with probability 1/2"""
    labels = list(pi.labels())
    if labels[0] != labels[1] and rng.random() < 0.5:
        old = labels[1]
        labels = [labels[0] if x == old else x for x in labels]
    return partition_from_labels(labels)


def _speed_task(payload: Tuple[MeasureRef, int, Tuple[float, ...], int, int]) -> List[int]:
    ref, n, grid, seed, replicate = payload
    path = simulate_coalescent(resolve_measure(ref), n, horizon=max(grid), seed=seed, replicate=replicate)
    return block_count_curve(path, grid)


def _eve_task(
    payload: Tuple[MeasureRef, int, int, int, float, float, bool, float]
) -> Tuple[Optional[float], Optional[float], float]:
    ref, n, seed, replicate, horizon, max_time, negative, theta = payload
    m = resolve_measure(ref)
    cdi = m.classify().regime == Regime.CDI
    run = simulate_fv(
        m,
        n,
        (0.0, horizon),
        seed=seed,
        replicate=replicate,
        until_fixation=cdi,
        max_time=max_time,
        record_path=False,
    )
    report = extract_eves(run, theta)
    eves = report.ordered_eves
    first = eves[0].location if report.resolved_upto >= 1 else None
    if negative and first is not None and len(eves) >= 2:
        first = max(eves[0].location, eves[1].location)
    second = eves[1].location if report.resolved_upto >= 2 else None
    if cdi:
        process = run.fixation_time if run.fixation_time is not None else run.horizon
    else:
        process = run.final_counts[0] / n
    return first, second, float(process)


# ---------------------------------------------------------------------------
# statistical tests


def rate_match_test(
    m: LambdaMeasure,
    n: int,
    replicates: int,
    seed: int,
    thresholds: Optional[ValidationThresholds] = None,
    window_length: float = 1.0,
    threads: int = 1,
    negative_control: bool = False,
) -> TestReport:
    """Per-size event counts of lookdown graphs against C(n,p) lambda_{n,p}"""
    thresholds = thresholds or ValidationThresholds()
    if not 2 <= n <= RATE_MAX_N:
        raise DomainError(f"rate_match_test enumerates sizes for 2 <= n <= {RATE_MAX_N}, got {n}")
    ref = measure_ref(m)
    counts = np.zeros(n + 1, dtype=int)
    for row in map_replicates(_rate_task, [(ref, n, window_length, seed, r) for r in range(replicates)], threads):
        counts += np.asarray(row)
    weights = merger_weights(m, n)
    if negative_control:
        # rates of n+1 levels restricted to sizes <= n
        weights = np.array([special.comb(n + 1, p) * lambda_rate(m, n + 1, p) for p in range(2, n + 1)])
    exposure = window_length * replicates
    cells: Dict[str, Dict[str, float]] = {}
    worst = 0.0
    failed = False
    for p in range(2, n + 1):
        expected = float(weights[p - 2]) * exposure
        observed = int(counts[p])
        if expected > 0.0:
            z = abs(observed - expected) / math.sqrt(expected)
        else:
            z = 0.0 if observed == 0 else math.inf
        worst = max(worst, z)
        failed = failed or z > thresholds.se_multiplier
        cells[str(p)] = {"observed": observed, "expected": expected, "z": z}
    if _underpowered(replicates, thresholds):
        verdict = Verdict.UNDECIDED
    else:
        verdict = Verdict.FAIL if failed else Verdict.PASS
    return TestReport(
        test_id="rate_match" + (".negative_control" if negative_control else ""),
        parameters={"measure": m.label, "n": n, "window_length": window_length},
        statistic=worst,
        threshold=thresholds.se_multiplier,
        details={"per_size": cells},
        verdict=verdict,
        sample_sizes={"replicates": replicates},
        seeds=[seed],
    )


def _two_sample_report(
    test_id: str,
    parameters: Dict[str, Any],
    left: List[Any],
    right: List[Any],
    cells: int,
    thresholds: ValidationThresholds,
    seed: int,
) -> TestReport:
    tv = tv_distance(left, right)
    threshold = tv_threshold(thresholds, cells, min(len(left), len(right)))
    if _underpowered(min(len(left), len(right)), thresholds):
        verdict = Verdict.UNDECIDED
    else:
        verdict = Verdict.PASS if tv < threshold else Verdict.FAIL
    left_hist = Counter(left)
    right_hist = Counter(right)
    return TestReport(
        test_id=test_id,
        parameters=parameters,
        statistic=tv,
        threshold=threshold,
        details={
            "left": {str(k): left_hist[k] for k in sorted(left_hist, key=str)},
            "right": {str(k): right_hist[k] for k in sorted(right_hist, key=str)},
        },
        verdict=verdict,
        sample_sizes={"left": len(left), "right": len(right)},
        seeds=[seed],
    )


def duality_test(
    m: LambdaMeasure,
    n: int,
    t: float,
    samples: int,
    seed: int,
    thresholds: Optional[ValidationThresholds] = None,
    threads: int = 1,
    t_bridge: Optional[float] = None,
) -> TestReport:
    """Block counts of pi(F_{0,t}, V) against the jump-chain coalescent at t"""
    thresholds = thresholds or ValidationThresholds()
    if m.classify().regime != Regime.DISCRETE:
        raise DomainError(f"duality_test needs a DISCRETE measure; {m.label} would need truncation")
    t_b = t if t_bridge is None else t_bridge
    ref = measure_ref(m)
    bridge_seed, chain_seed = derive_seed(seed, "duality.bridge"), derive_seed(seed, "duality.chain")
    bridge_counts = map_replicates(_bridge_count_task, [(ref, n, t_b, bridge_seed, r) for r in range(samples)], threads)
    chain_counts = map_replicates(_chain_count_task, [(ref, n, t, chain_seed, r) for r in range(samples)], threads)
    return _two_sample_report(
        "duality" + (".negative_control" if t_bridge is not None else ""),
        {"measure": m.label, "n": n, "t": t, "t_bridge": t_b},
        bridge_counts,
        chain_counts,
        n,
        thresholds,
        seed,
    )


def backward_law_test(
    m: LambdaMeasure,
    n: int,
    t: float,
    samples: int,
    seed: int,
    thresholds: Optional[ValidationThresholds] = None,
    threads: int = 1,
    t_lookdown: Optional[float] = None,
) -> TestReport:
    """Block counts of the lookdown flow over a window of length t against the coalescent at t"""
    thresholds = thresholds or ValidationThresholds()
    t_l = t if t_lookdown is None else t_lookdown
    ref = measure_ref(m)
    look_seed, chain_seed = derive_seed(seed, "backward.lookdown"), derive_seed(seed, "backward.chain")
    look_counts = map_replicates(_lookdown_count_task, [(ref, n, t_l, look_seed, r) for r in range(samples)], threads)
    chain_counts = map_replicates(_chain_count_task, [(ref, n, t, chain_seed, r) for r in range(samples)], threads)
    return _two_sample_report(
        "backward_law" + (".negative_control" if t_lookdown is not None else ""),
        {"measure": m.label, "n": n, "t": t, "t_lookdown": t_l},
        look_counts,
        chain_counts,
        n,
        thresholds,
        seed,
    )


def exchangeability_test(
    source: str,
    m: LambdaMeasure,
    t: float,
    samples: int,
    seed: int,
    n: int = SHAPE_N,
    thresholds: Optional[ValidationThresholds] = None,
    threads: int = 1,
    perm: Optional[Sequence[int]] = None,
) -> TestReport:
    """Partition law at t against its image under a fixed permutation

    source is "coalescent", "lookdown" or "biased" (a sampler that favours
    merging levels 1 and 2, the harness self-test).
    """
    thresholds = thresholds or ValidationThresholds()
    if source not in ("coalescent", "lookdown", "biased"):
        raise DomainError(f"Unknown partition source {source!r}")
    permutation = list(perm) if perm is not None else list(range(2, n + 1)) + [1]
    ref = measure_ref(m)
    texts = map_replicates(_shape_task, [(source, ref, n, t, seed, r) for r in range(samples)], threads)
    images = [relabel(parse_partition(text), permutation).to_text() for text in texts]
    report = _two_sample_report(
        f"exchangeability.{source}",
        {"measure": m.label, "n": n, "t": t, "permutation": permutation, "source": source},
        texts,
        images,
        bell_number(n),
        thresholds,
        seed,
    )
    return report


def bell_number(n: int) -> int:
    """Number of partitions of [n], the sum of the Stirling numbers S(n, k)"""
    return int(sum(special.stirling2(n, k, exact=True) for k in range(n + 1)))


def speed_test(
    m: LambdaMeasure,
    n: int,
    t_grid: Sequence[float],
    replicates: int,
    seed: int,
    thresholds: Optional[ValidationThresholds] = None,
    threads: int = 1,
) -> TestReport:
    """Mean #blocks(t) / v(t) on a time grid, per point PASS inside the band

    Points with v(t) > n/2 or v(t) < SPEED_MIN_BLOCKS are UNDECIDED.
    """
    thresholds = thresholds or ValidationThresholds()
    if m.classify().regime != Regime.CDI:
        raise DomainError(f"speed_test needs a CDI measure; {m.label} is not")
    grid = tuple(sorted(float(t) for t in t_grid))
    if not grid or grid[0] <= 0.0:
        raise DomainError("speed_test needs a grid of positive times")
    ref = measure_ref(m)
    rows = map_replicates(_speed_task, [(ref, n, grid, seed, r) for r in range(replicates)], threads)
    counts = np.asarray(rows, dtype=float)
    low, high = thresholds.speed_band
    points: Dict[str, Dict[str, Any]] = {}
    verdicts = []
    for k, t in enumerate(grid):
        v = cdi_speed(m, t)
        mean = float(counts[:, k].mean())
        ratio = mean / v
        if v > n / 2.0 or v < SPEED_MIN_BLOCKS:
            # truncation at n above, large-time regime below
            verdict = Verdict.UNDECIDED
        else:
            verdict = Verdict.PASS if low <= ratio <= high else Verdict.FAIL
        verdicts.append(verdict)
        points[repr(t)] = {"v": v, "mean_blocks": mean, "ratio": ratio, "verdict": verdict.value}
    if Verdict.FAIL in verdicts:
        overall = Verdict.FAIL
    elif Verdict.PASS in verdicts:
        overall = Verdict.PASS
    else:
        overall = Verdict.UNDECIDED
    decided = [points[repr(t)]["ratio"] for t, v in zip(grid, verdicts) if v != Verdict.UNDECIDED]
    return TestReport(
        test_id="speed",
        parameters={"measure": m.label, "n": n, "t_grid": list(grid), "band": [low, high]},
        statistic=max((abs(r - 1.0) for r in decided), default=None),
        threshold=max(1.0 - low, high - 1.0),
        details={"points": points},
        verdict=overall,
        sample_sizes={"replicates": replicates},
        seeds=[seed],
    )


def eve_uniformity_test(
    m: LambdaMeasure,
    n: int,
    runs: int,
    seed: int,
    thresholds: Optional[ValidationThresholds] = None,
    threads: int = 1,
    horizon: float = 1.0,
    max_time: float = 1e3,
    negative_control: bool = False,
) -> TestReport:
    """KS uniformity of the rank-1 (and rank-2) Eve and rank correlation with the fixation time"""
    thresholds = thresholds or ValidationThresholds()
    ref = measure_ref(m)
    payloads = [(ref, n, seed, r, horizon, max_time, negative_control, thresholds.eve_theta) for r in range(runs)]
    results = map_replicates(_eve_task, payloads, threads)
    resolved = [(first, value) for first, _, value in results if first is not None]
    firsts = np.array([first for first, _ in resolved])
    seconds = np.array([second for _, second, _ in results if second is not None])
    process = np.array([value for _, value in resolved])
    details: Dict[str, Any] = {"unresolved_fraction": (runs - len(resolved)) / runs if runs else 0.0}
    ks_first: Optional[float] = None
    passed = True
    if len(firsts) > 0:
        ks_first = float(stats.kstest(firsts, "uniform").pvalue)
        details["ks_rank1_pvalue"] = ks_first
        passed = ks_first > thresholds.ks_alpha
    if len(seconds) >= thresholds.min_runs:
        ks_second = float(stats.kstest(seconds, "uniform").pvalue)
        details["ks_rank2_pvalue"] = ks_second
        passed = passed and ks_second > thresholds.ks_alpha
    if len(process) > 1 and np.ptp(process) > 0.0:
        corr = stats.spearmanr(firsts, process)
        corr_p = float(corr.pvalue)
        details["rank_correlation"] = float(corr.statistic) if hasattr(corr, "statistic") else float(corr[0])
        details["rank_correlation_pvalue"] = corr_p
        passed = passed and corr_p > thresholds.rank_corr_alpha
    if len(firsts) < thresholds.min_runs:
        verdict = Verdict.UNDECIDED
    else:
        verdict = Verdict.PASS if passed else Verdict.FAIL
    return TestReport(
        test_id="eve_uniformity" + (".negative_control" if negative_control else ""),
        parameters={"measure": m.label, "n": n, "horizon": horizon},
        statistic=ks_first,
        threshold=thresholds.ks_alpha,
        details=details,
        verdict=verdict,
        sample_sizes={"runs": runs, "rank1": int(len(firsts)), "rank2": int(len(seconds))},
        seeds=[seed],
    )


# ---------------------------------------------------------------------------
# exact checks


def _graph_boundaries(g: LookdownGraphN) -> List[float]:
    return [g.window[0]] + list(g.times)


def cocycle_check(
    m: LambdaMeasure, n: int, graphs: int, seed: int, events_per_graph: float = 10.0
) -> TestReport:
    """Pi_{r,t} = Coag(Pi_{s,t}, Pi_{r,s}) at event-boundary triples, exact"""
    length = events_per_graph / max(float(merger_weights(m, n).sum()), 1e-300)
    checked = 0
    failures = 0
    for r in range(graphs):
        g = sample_graph(m, n, (0.0, length), seed=seed, replicate=r)
        bounds = _graph_boundaries(g)
        triples = list(combinations(bounds, 3))
        if len(triples) > COCYCLE_MAX_TRIPLES:
            picker = make_rng(seed, r, STREAM_SAMPLES)
            chosen = picker.choice(len(triples), size=COCYCLE_MAX_TRIPLES, replace=False)
            triples = [triples[int(i)] for i in sorted(chosen)]
        for a, b, c in triples:
            checked += 1
            if flow_partition(g, a, c) != coag(flow_partition(g, b, c), flow_partition(g, a, b)):
                failures += 1
    return TestReport(
        test_id="cocycle",
        parameters={"measure": m.label, "n": n, "window_length": length},
        statistic=float(failures),
        threshold=0.0,
        verdict=Verdict.PASS if failures == 0 else Verdict.FAIL,
        sample_sizes={"graphs": graphs, "triples": checked},
        seeds=[seed],
    )


def reconstruction_check(
    m: LambdaMeasure, n: int, graphs: int, seed: int, events_per_graph: float = 10.0
) -> TestReport:
    """Every event is recovered from the flow partitions on either side of it"""
    length = events_per_graph / max(float(merger_weights(m, n).sum()), 1e-300)
    checked = 0
    failures = 0
    hidden = 0
    for r in range(graphs):
        g = sample_graph(m, n, (0.0, length), seed=seed, replicate=r)
        bounds = _graph_boundaries(g)
        end = g.window[1]
        for previous, event in zip(bounds, g.events):
            checked += 1
            # across the event alone: before is 1_I, after is the identity
            single = reconstruct_event(flow_partition(g, previous, event.time), identity_partition(n))
            if single != event.levels:
                failures += 1
            after = flow_partition(g, event.time, end)
            before = flow_partition(g, previous, end)
            visible = tuple(i for i in event.levels if i <= after.num_blocks)
            try:
                recovered = reconstruct_event(before, after)
            except ReconstructionError:
                if len(visible) >= 2:
                    failures += 1
                else:
                    hidden += 1
                continue
            if recovered != visible:
                failures += 1
    return TestReport(
        test_id="reconstruction",
        parameters={"measure": m.label, "n": n, "window_length": length},
        statistic=float(failures),
        threshold=0.0,
        details={"absorbed_events": hidden},
        verdict=Verdict.PASS if failures == 0 else Verdict.FAIL,
        sample_sizes={"graphs": graphs, "events": checked},
        seeds=[seed],
    )


# ---------------------------------------------------------------------------
# suite

DEFAULT_TESTS = (
    "backward_law",
    "cocycle",
    "duality",
    "eve_uniformity",
    "exchangeability.coalescent",
    "exchangeability.lookdown",
    "rate_match",
    "reconstruction",
    "speed",
)


def speed_grid(m: LambdaMeasure, n: int) -> List[float]:
    """Times at which v(t) is n/20, n/50 and n/100"""
    return sorted(psi_tail(m, n / k) for k in (20.0, 50.0, 100.0))


def run_suite(config: RunConfig, m: Optional[LambdaMeasure] = None) -> List[TestReport]:
    """Runs the selected tests (all applicable ones by default), ordered by test id"""
    m = m or make_measure(config.measure)
    regime = m.classify().regime
    selected = list(config.tests) or list(DEFAULT_TESTS)
    unknown = [name for name in selected if name not in DEFAULT_TESTS]
    if unknown:
        raise DomainError(f"Unknown validation tests: {unknown}")
    th = config.thresholds
    seed = config.seed if config.seed is not None else 0
    reps = config.replicates
    threads = config.threads
    t = config.horizon if config.horizon is not None else 1.0
    small = min(config.n, 5)
    reports: List[TestReport] = []

    def wanted(name: str) -> bool:
        return name in selected

    if wanted("rate_match"):
        rate_n = min(config.n, RATE_MAX_N)
        s = derive_seed(seed, "rate_match")
        reports.append(rate_match_test(m, rate_n, reps, s, th, threads=threads))
        if config.negative_controls:
            reports.append(rate_match_test(m, rate_n, reps, s, th, threads=threads, negative_control=True))
    if wanted("backward_law"):
        s = derive_seed(seed, "backward_law")
        reports.append(backward_law_test(m, small, t, reps, s, th, threads))
        if config.negative_controls:
            reports.append(backward_law_test(m, small, t, reps, s, th, threads, t_lookdown=2.0 * t))
    if wanted("duality") and regime == Regime.DISCRETE:
        s = derive_seed(seed, "duality")
        reports.append(duality_test(m, small, t, reps, s, th, threads))
        if config.negative_controls:
            reports.append(duality_test(m, small, t, reps, s, th, threads, t_bridge=2.0 * t))
    for source in ("coalescent", "lookdown"):
        if wanted(f"exchangeability.{source}"):
            s = derive_seed(seed, f"exchangeability.{source}")
            reports.append(exchangeability_test(source, m, t, reps, s, thresholds=th, threads=threads))
    if config.negative_controls and any(name.startswith("exchangeability") for name in selected):
        s = derive_seed(seed, "exchangeability.biased")
        reports.append(exchangeability_test("biased", m, t, reps, s, thresholds=th, threads=threads))
    if wanted("cocycle"):
        reports.append(cocycle_check(m, min(config.n, 20), min(reps, 100), derive_seed(seed, "cocycle")))
    if wanted("reconstruction"):
        reports.append(reconstruction_check(m, min(config.n, 20), min(reps, 100), derive_seed(seed, "reconstruction")))
    if wanted("eve_uniformity"):
        s = derive_seed(seed, "eve_uniformity")
        reports.append(eve_uniformity_test(m, config.n, reps, s, th, threads, horizon=t, max_time=config.max_time))
        if config.negative_controls:
            reports.append(
                eve_uniformity_test(
                    m, config.n, reps, s, th, threads, horizon=t, max_time=config.max_time, negative_control=True
                )
            )
    if wanted("speed") and regime == Regime.CDI:
        grid = list(config.t_grid) or speed_grid(m, config.n)
        reports.append(speed_test(m, config.n, grid, reps, derive_seed(seed, "speed"), th, threads))

    reports.sort(key=lambda report: report.test_id)
    for report in reports:
        if report.verdict == Verdict.UNDECIDED:
            logger.warning("%s is UNDECIDED", report.test_id)
    summary = Counter(report.verdict.value for report in reports)
    logger.info("Validation suite: %s", dict(sorted(summary.items())))
    return reports


def suite_failed(reports: Sequence[TestReport]) -> bool:
    return any(report.verdict == Verdict.FAIL for report in reports)
