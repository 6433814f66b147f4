"""
Tests for lookdown graphs, the flow of partitions and event reconstruction
"""

import numpy as np
import pytest
from scipy import stats

from lambda_flows.errors import DomainError, ReconstructionError
from lambda_flows.lookdown import (
    ABSORBED,
    LookdownGraphN,
    ParticleState,
    ReproductionEvent,
    ancestor_levels,
    apply_event,
    empirical_measure,
    evolve,
    extinction_times,
    flow_partition,
    graph_meta,
    lowest_level,
    reconstruct_event,
    sample_graph,
    source_indices,
    trajectory_frame,
)
from lambda_flows.measure import dirac0
from lambda_flows.models import ValidationThresholds
from lambda_flows.partition import coag, encode_single_block, identity_partition, parse_partition
from lambda_flows.validate import tv_distance, tv_threshold


class TestEvents:
    """Single reproduction events"""

    def test_levels_are_canonical(self):
        event = ReproductionEvent(0.1, (4, 2, 2))
        assert event.levels == (2, 4)
        assert event.parent == 2

    def test_event_needs_two_levels(self):
        with pytest.raises(DomainError):
            ReproductionEvent(0.1, (3,))

    def test_apply_event(self):
        """Levels in I copy the parent; the others shift up by |I n [i]| - 1"""
        state = apply_event(ParticleState(("a", "b", "c", "d", "e")), [2, 4])
        assert state.types == ("a", "b", "c", "b", "d")
        assert list(source_indices(5, (2, 4))) == [0, 1, 2, 1, 3]

    def test_apply_event_top_level(self):
        """An event on {1, n} overwrites level n only"""
        state = apply_event(("a", "b", "c"), [1, 3])
        assert state.types == ("a", "b", "a")

    def test_apply_event_invalid(self):
        with pytest.raises(DomainError):
            apply_event(("a", "b"), [1, 3])


class TestGraph:
    """Graph validation, sampling and windows"""

    def test_time_order_enforced(self):
        with pytest.raises(DomainError):
            LookdownGraphN(
                n=3,
                window=(0.0, 1.0),
                events=(ReproductionEvent(0.5, (1, 2)), ReproductionEvent(0.5, (2, 3))),
            )

    def test_levels_bounded_by_n(self):
        with pytest.raises(DomainError):
            LookdownGraphN(n=3, window=(0.0, 1.0), events=(ReproductionEvent(0.5, (1, 4)),))

    def test_sample_graph(self, lebesgue):
        g = sample_graph(lebesgue, 6, (0.0, 2.0), seed=12)
        times = [event.time for event in g.events]
        assert all(0.0 < t <= 2.0 for t in times)
        assert times == sorted(set(times))
        assert all(2 <= len(event.levels) <= 6 for event in g.events)
        assert g == sample_graph(lebesgue, 6, (0.0, 2.0), seed=12)

    def test_zero_rate_graph_is_empty(self):
        g = sample_graph(dirac0(0.0), 4, (0.0, 5.0), seed=1)
        assert g.events == ()

    def test_empty_window(self, kingman):
        g = sample_graph(kingman, 4, (1.0, 1.0), seed=1)
        assert g.events == ()
        assert flow_partition(g, 1.0, 1.0) == identity_partition(4)

    def test_events_between(self, small_graph):
        assert [e.time for e in small_graph.events_between(0.2, 0.8)] == [0.5, 0.8]
        with pytest.raises(DomainError):
            small_graph.events_between(0.0, 2.0)

    def test_extended_keeps_prefix(self, kingman):
        g = sample_graph(kingman, 5, (0.0, 1.0), seed=3)
        longer = g.extended(kingman, 3.0, np.random.default_rng(0))
        assert longer.window == (0.0, 3.0)
        assert longer.events[: len(g.events)] == g.events
        assert all(e.time > 1.0 for e in longer.events[len(g.events):])

    def test_records(self, small_graph):
        again = LookdownGraphN.from_records(graph_meta(small_graph), small_graph.to_records())
        assert again == small_graph

    def test_malformed_records(self):
        with pytest.raises(DomainError):
            LookdownGraphN.from_records({"n": 3}, [])


class TestFlowOfPartitions:
    """Pi_{s,t} and its relatives"""

    def test_single_event(self):
        """Across one event the flow partition is 1_I"""
        g = LookdownGraphN(n=5, window=(0.0, 1.0), events=(ReproductionEvent(0.5, (2, 4)),))
        assert flow_partition(g, 0.0, 1.0) == encode_single_block((2, 4), 5)

    def test_small_graph(self, small_graph):
        """Block i collects the levels descending from level i"""
        pi = flow_partition(small_graph, 0.0, 1.0)
        labels = ancestor_levels(small_graph, 0.0, 1.0)
        for index, block in enumerate(pi.blocks, start=1):
            assert all(labels[i - 1] == index for i in block)

    def test_cocycle(self, small_graph):
        """Pi_{r,t} = Coag(Pi_{s,t}, Pi_{r,s})"""
        points = [0.0, 0.2, 0.5, 0.8, 1.0]
        for r in points:
            for s in points:
                for t in points:
                    if r <= s <= t:
                        expected = coag(flow_partition(small_graph, s, t), flow_partition(small_graph, r, s))
                        assert flow_partition(small_graph, r, t) == expected

    def test_cocycle_sampled(self, lebesgue):
        g = sample_graph(lebesgue, 8, (0.0, 1.0), seed=4)
        bounds = [0.0] + [e.time for e in g.events] + [1.0]
        for i in range(len(bounds)):
            for j in range(i, len(bounds)):
                for k in range(j, len(bounds)):
                    r, s, t = bounds[i], bounds[j], bounds[k]
                    assert flow_partition(g, r, t) == coag(flow_partition(g, s, t), flow_partition(g, r, s))

    def test_evolve_matches_flow(self, small_graph):
        initial = [0.1, 0.2, 0.3, 0.4, 0.5]
        state = evolve(small_graph, initial, 1.0)
        pi = flow_partition(small_graph, 0.0, 1.0)
        for index, block in enumerate(pi.blocks):
            assert {state.types[i - 1] for i in block} == {initial[index]}

    def test_lowest_level(self):
        g = LookdownGraphN(n=5, window=(0.0, 1.0), events=(ReproductionEvent(0.5, (2, 4)),))
        assert lowest_level(g, 4, 1.0) == 5
        assert lowest_level(g, 5, 1.0) is ABSORBED
        assert lowest_level(g, 5, 0.4) == 5

    def test_extinction_times(self):
        g = LookdownGraphN(
            n=4,
            window=(0.0, 1.0),
            events=(ReproductionEvent(0.3, (1, 2)), ReproductionEvent(0.6, (1, 2, 3))),
        )
        times = extinction_times(g)
        assert times[4] == 0.3
        assert times[3] == 0.6
        assert times[2] == 0.6
        assert times[1] is None

    def test_empirical_measure(self):
        g = LookdownGraphN(n=5, window=(0.0, 1.0), events=(ReproductionEvent(0.5, (2, 4)),))
        state = empirical_measure(g, [0.1, 0.2, 0.3, 0.4, 0.5], 0.0, 1.0)
        assert state.atoms == [(0.2, 0.4)]
        assert state.dust == pytest.approx(0.6)

    def test_empirical_measure_without_events_is_dust(self, small_graph):
        state = empirical_measure(small_graph, [0.1, 0.2, 0.3, 0.4, 0.5], 0.0, 0.1)
        assert state.atoms == []
        assert state.dust == 1.0

    def test_empirical_measure_needs_distinct_types(self, small_graph):
        with pytest.raises(DomainError):
            empirical_measure(small_graph, [0.1, 0.1, 0.3, 0.4, 0.5], 0.0, 1.0)

    def test_trajectory_frame(self, small_graph):
        frame = trajectory_frame(small_graph, [0.1, 0.2, 0.3, 0.4, 0.5])
        assert list(frame.columns) == ["time", "level", "type"]
        assert len(frame) == 5 * (1 + len(small_graph.events))


class TestReconstruction:
    """Recovering the level set of an event from the partitions around it"""

    def test_single_event(self):
        before = encode_single_block((2, 4, 5), 6)
        assert reconstruct_event(before, identity_partition(6)) == (2, 4, 5)

    def test_through_later_events(self, small_graph):
        """The event {1,2,5} at 0.5 seen through the later event {3,4}: level 5 is absorbed"""
        before = flow_partition(small_graph, 0.2, 1.0)
        after = flow_partition(small_graph, 0.5, 1.0)
        assert after.num_blocks == 4
        assert reconstruct_event(before, after) == (1, 2)

    def test_invisible_event(self, small_graph):
        """The event {2,4} at 0.2 leaves no descendants of level 4 by time 1"""
        with pytest.raises(ReconstructionError):
            reconstruct_event(flow_partition(small_graph, 0.0, 1.0), flow_partition(small_graph, 0.2, 1.0))

    def test_absorbed_indices_are_dropped(self):
        """Levels above the block count of after leave no trace"""
        after = parse_partition("{1,2}{3}{4}")
        before = coag(after, encode_single_block((1, 3, 4), 4))
        assert reconstruct_event(before, after) == (1, 3)

    def test_no_merge(self):
        with pytest.raises(ReconstructionError, match="No merge"):
            reconstruct_event(identity_partition(4), identity_partition(4))

    def test_two_groups(self):
        with pytest.raises(ReconstructionError):
            reconstruct_event(parse_partition("{1,2}{3,4}"), identity_partition(4))

    def test_every_sampled_event(self, lebesgue):
        g = sample_graph(lebesgue, 10, (0.0, 1.0), seed=21)
        bounds = [0.0] + [e.time for e in g.events]
        for previous, event in zip(bounds, g.events):
            before = flow_partition(g, previous, event.time)
            assert reconstruct_event(before, identity_partition(10)) == event.levels


class TestIncrements:
    """Partitions over disjoint windows"""

    def test_disjoint_windows_are_stationary_and_independent(self, lebesgue):
        reps = 2000
        first, second = [], []
        for replicate in range(reps):
            g = sample_graph(lebesgue, 4, (0.0, 1.0), seed=21, replicate=replicate)
            first.append(flow_partition(g, 0.0, 0.5).num_blocks)
            second.append(flow_partition(g, 0.5, 1.0).num_blocks)
        assert tv_distance(first, second) < tv_threshold(ValidationThresholds(), 4, reps)

        rows, cols = sorted(set(first)), sorted(set(second))
        table = np.zeros((len(rows), len(cols)))
        for a, b in zip(first, second):
            table[rows.index(a), cols.index(b)] += 1
        assert stats.chi2_contingency(table).pvalue > 0.001
