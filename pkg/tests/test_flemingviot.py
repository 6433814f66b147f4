"""
Tests for the Lambda Fleming-Viot process and its Eves
"""

import pytest

from lambda_flows.errors import DomainError, SimulationError
from lambda_flows.flemingviot import (
    cdi_diagnostics,
    decompose_run,
    detect_simultaneous_extinction,
    draw_initial_types,
    extract_eves,
    recompose_path,
    regime_diagnostics,
    simulate_fv,
    simulate_fv_adaptive,
)
from lambda_flows.lookdown import LookdownGraphN, ReproductionEvent
from lambda_flows.models import EveCase, Regime
from lambda_flows.partition import identity_partition

TYPES = (0.1, 0.2, 0.3, 0.4, 0.5)


def tied_graph():
    """Ancestor 4 dies at 0.3, ancestors 2 and 3 together at 0.6"""
    return LookdownGraphN(
        n=4,
        window=(0.0, 1.0),
        events=(ReproductionEvent(0.3, (1, 2)), ReproductionEvent(0.6, (1, 2, 3))),
    )


class TestSimulateFv:
    """Paths of the measure-valued process"""

    def test_kingman_fixes_on_level_one(self, kingman):
        run = simulate_fv(kingman, 5, seed=1, until_fixation=True)
        assert run.fixed
        assert run.regime == Regime.CDI
        assert run.final_state.atoms == [(run.initial_types[0], 1.0)]
        assert run.final_state.dust == 0.0

    def test_initial_state_is_dust(self, kingman):
        run = simulate_fv(kingman, 5, seed=2)
        t0, state = run.path[0]
        assert t0 == 0.0
        assert state.atoms == []
        assert state.dust == 1.0

    def test_masses_sum_to_one(self, lebesgue):
        run = simulate_fv(lebesgue, 8, window=(0.0, 2.0), seed=3)
        for _, state in run.path:
            assert sum(mass for _, mass in state.atoms) + state.dust == pytest.approx(1.0)

    def test_replay_gives_identical_path(self, kingman):
        run = simulate_fv(kingman, 6, window=(0.0, 2.0), seed=4)
        again = simulate_fv(kingman, 6, window=(0.0, 2.0), seed=4, graph=run.graph)
        assert again.path == run.path
        assert again.initial_types == run.initial_types

    def test_default_types_come_from_the_types_stream(self, kingman):
        run = simulate_fv(kingman, 5, seed=7, replicate=3)
        assert run.initial_types == draw_initial_types(5, seed=7, replicate=3)

    def test_initial_types_must_be_distinct(self, kingman, small_graph):
        with pytest.raises(DomainError):
            simulate_fv(kingman, 5, graph=small_graph, initial_types=[0.1, 0.1, 0.2, 0.3, 0.4])

    def test_initial_types_length(self, kingman):
        with pytest.raises(DomainError):
            simulate_fv(kingman, 5, initial_types=[0.1, 0.2])

    def test_graph_size_mismatch(self, kingman, small_graph):
        with pytest.raises(DomainError):
            simulate_fv(kingman, 4, graph=small_graph)

    def test_state_at(self, dirac_half, small_graph):
        run = simulate_fv(dirac_half, 5, graph=small_graph, initial_types=TYPES)
        assert run.state_at(0.6) == run.path[2][1]
        assert run.state_at(0.1).dust == 1.0
        with pytest.raises(DomainError):
            run.state_at(-1.0)

    def test_state_at_without_path(self, dirac_half, small_graph):
        run = simulate_fv(dirac_half, 5, graph=small_graph, initial_types=TYPES, record_path=False)
        assert run.path == []
        assert len(run.event_times) == 3
        with pytest.raises(SimulationError):
            run.state_at(0.5)

    @pytest.mark.slow
    def test_kingman_always_fixes(self, kingman):
        for replicate in range(30):
            run = simulate_fv(kingman, 50, seed=33, replicate=replicate, until_fixation=True, record_path=False)
            assert run.fixed
            assert run.final_state.atoms == [(run.initial_types[0], 1.0)]

    def test_types_only_die_out(self, kingman):
        """Alive types never increase, nor do atoms between dust-free states"""
        for replicate in range(10):
            run = simulate_fv(kingman, 10, seed=34, replicate=replicate, until_fixation=True)
            alive = [len(state.atoms) + round(state.dust * run.n) for _, state in run.path]
            assert alive == sorted(alive, reverse=True)
            assert alive[-1] == 1
            for (_, before), (_, after) in zip(run.path, run.path[1:]):
                if before.dust == 0.0 and after.dust == 0.0:
                    assert len(after.atoms) <= len(before.atoms)


class TestDecomposition:
    """A run is its flow of partitions together with its Eves"""

    def test_recompose_matches_path(self, lebesgue):
        run = simulate_fv(lebesgue, 7, window=(0.0, 1.5), seed=5)
        flows, eves = decompose_run(run)
        assert flows[0][1] == identity_partition(7)
        assert eves == run.initial_types
        assert recompose_path(flows, eves) == run.path

    def test_small_graph(self, dirac_half, small_graph):
        run = simulate_fv(dirac_half, 5, graph=small_graph, initial_types=TYPES)
        flows, eves = decompose_run(run)
        assert [t for t, _ in flows] == [0.0, 0.2, 0.5, 0.8]
        final = recompose_path(flows, eves)[-1][1]
        assert final.atoms == [(0.1, 0.4), (0.2, 0.4)]
        assert final.dust == pytest.approx(0.2)

    @pytest.mark.parametrize("name", ["kingman", "dirac_half", "beta05", "lebesgue"])
    def test_recompose_every_regime(self, name, request):
        m = request.getfixturevalue(name)
        for replicate in range(25):
            run = simulate_fv(m, 6, seed=35, replicate=replicate)
            assert recompose_path(*decompose_run(run)) == run.path


class TestEves:
    """Eve extraction in the extinction and persistent cases"""

    def test_extinction_order(self, kingman):
        """Kingman ancestors die one at a time from the top, so every rank resolves"""
        run = simulate_fv(kingman, 5, seed=1, until_fixation=True)
        report = extract_eves(run)
        assert report.regime_case == EveCase.EXTINCTION
        assert report.resolved_upto == 5
        assert report.ties == []
        assert [eve.location for eve in report.ordered_eves] == list(run.initial_types)

    def test_ties_stop_the_ranking(self, kingman):
        run = simulate_fv(kingman, 4, graph=tied_graph(), initial_types=TYPES[:4])
        report = extract_eves(run)
        assert report.ties == [[2, 3]]
        assert report.resolved_upto == 1
        assert [eve.rank for eve in report.ordered_eves] == [1]
        assert report.diagnostics["fixation_time"] == 0.6

    def test_persistent_ratios(self, dirac_half, small_graph):
        """Final masses 2/5, 2/5: ratios 0.4 then 2/3"""
        run = simulate_fv(dirac_half, 5, graph=small_graph, initial_types=TYPES)
        strict = extract_eves(run)
        assert strict.regime_case == EveCase.PERSISTENT
        assert strict.resolved_upto == 0
        assert [eve.evidence for eve in strict.ordered_eves] == pytest.approx([0.4, 2 / 3])

        lenient = extract_eves(run, theta=0.3)
        assert lenient.resolved_upto == 2
        assert lenient.diagnostics["mass_order_agrees"] is True
        assert lenient.ordered_eves[0].location == 0.1

    def test_persistent_ranking_follows_mass(self, dirac_half):
        """Type 3 ends with mass 1/2 and type 1 with 1/3, so type 3 ranks first"""
        graph = LookdownGraphN(
            n=6,
            window=(0.0, 1.0),
            events=(ReproductionEvent(0.1, (3, 4, 5)), ReproductionEvent(0.2, (1, 6))),
        )
        run = simulate_fv(dirac_half, 6, graph=graph, initial_types=(0.1, 0.2, 0.3, 0.4, 0.5, 0.6))
        report = extract_eves(run, theta=0.4)
        assert [eve.ancestor for eve in report.ordered_eves] == [3, 1]
        assert [eve.location for eve in report.ordered_eves] == [0.3, 0.1]
        assert [eve.evidence for eve in report.ordered_eves] == pytest.approx([0.5, 2 / 3])
        assert report.resolved_upto == 2
        assert report.diagnostics["mass_order_agrees"] is False
        assert extract_eves(run, theta=0.6).resolved_upto == 0

    def test_adaptive_kingman(self, kingman):
        run, report = simulate_fv_adaptive(kingman, 6, seed=3)
        assert report.regime_case == EveCase.EXTINCTION
        assert report.resolved_upto >= 1
        assert report.ordered_eves[0].location == run.initial_types[0]

    def test_adaptive_needs_positive_horizon(self, kingman):
        with pytest.raises(DomainError):
            simulate_fv_adaptive(kingman, 6, horizon=0.0)


class TestDiagnostics:
    """Regime-specific evidence"""

    def test_simultaneous_extinction(self, kingman):
        run = simulate_fv(kingman, 4, graph=tied_graph(), initial_types=TYPES[:4])
        ties = detect_simultaneous_extinction(run)
        assert ties.tie_times == [0.6]
        assert ties.tie_groups == [[2, 3]]

    def test_kingman_never_ties(self, kingman):
        """A binary event pushes a single copy off the top level"""
        for replicate in range(20):
            run = simulate_fv(kingman, 8, seed=36, replicate=replicate, until_fixation=True, record_path=False)
            assert detect_simultaneous_extinction(run).tie_groups == []

    @pytest.mark.slow
    def test_multiple_merger_ties_thin_out(self, beta15):
        """Ties among the five lowest types get rarer as levels are added"""

        def tied_runs(n):
            count = 0
            for replicate in range(300):
                run = simulate_fv(beta15, n, seed=37, replicate=replicate, until_fixation=True, record_path=False)
                groups = detect_simultaneous_extinction(run).tie_groups
                count += any(sum(1 for i in group if i <= 5) > 1 for group in groups)
            return count

        assert tied_runs(40) < tied_runs(5)

    def test_simultaneous_extinction_is_cdi_only(self, dirac_half, small_graph):
        run = simulate_fv(dirac_half, 5, graph=small_graph, initial_types=TYPES)
        with pytest.raises(DomainError):
            detect_simultaneous_extinction(run)

    def test_discrete_jumps(self, dirac_half, small_graph):
        """Level-one mass 0, 0.6, 0.4: the primitive-Eve complement jumps up at 0.8"""
        run = simulate_fv(dirac_half, 5, graph=small_graph, initial_types=TYPES)
        diagnostics = regime_diagnostics(run, t_grid=[0.0, 0.5, 0.9])
        assert diagnostics.regime == Regime.DISCRETE
        assert diagnostics.last_positive_jump_time == 0.8
        assert diagnostics.positive_jumps_after == {"0.0": 1, "0.5": 1, "0.9": 0}

    def test_dust_case(self, beta05, small_graph):
        run = simulate_fv(beta05, 5, graph=small_graph, initial_types=TYPES)
        diagnostics = regime_diagnostics(run)
        assert diagnostics.regime == Regime.INTENSIVE_W_DUST
        assert diagnostics.never_parent_levels == 1
        assert diagnostics.never_reproduced_types == 2
        assert diagnostics.positive_frequency_fraction == pytest.approx(0.4)

    def test_dust_case_every_level_a_parent(self, beta05):
        """Parents 3, 2, 1 in turn: every level below the top is used and every type below it reproduces"""
        graph = LookdownGraphN(
            n=4,
            window=(0.0, 1.0),
            events=(
                ReproductionEvent(0.1, (3, 4)),
                ReproductionEvent(0.2, (2, 3)),
                ReproductionEvent(0.3, (1, 2)),
            ),
        )
        run = simulate_fv(beta05, 4, graph=graph, initial_types=TYPES[:4])
        diagnostics = regime_diagnostics(run)
        assert diagnostics.never_parent_levels == 0
        assert diagnostics.never_reproduced_types == 0
        assert diagnostics.positive_frequency_fraction == pytest.approx(0.75)
        assert regime_diagnostics(run, cutoff=2).never_parent_levels == 0
        with pytest.raises(DomainError):
            regime_diagnostics(run, cutoff=4)

    @pytest.mark.slow
    def test_top_levels_rarely_parents(self, beta05):
        """With u log u finite, level n - 1 almost never leads an event"""
        runs = 100
        hits = 0
        for replicate in range(runs):
            run = simulate_fv(beta05, 200, window=(0.0, 10.0), seed=31, replicate=replicate, record_path=False)
            hits += regime_diagnostics(run).never_parent_levels > 0
        assert hits >= 0.95 * runs

    def test_discrete_jumps_die_out(self, dirac_half):
        """Positive jumps of the primitive-Eve complement stop once the run fixes"""
        grid = [0.1, 1.0, 5.0, 20.0]
        with_jumps = {t: 0 for t in grid}
        for replicate in range(100):
            run = simulate_fv(dirac_half, 10, window=(0.0, 30.0), seed=32, replicate=replicate, record_path=False)
            after = regime_diagnostics(run, t_grid=grid).positive_jumps_after
            counts = [after[repr(t)] for t in grid]
            assert counts == sorted(counts, reverse=True)
            for t, count in zip(grid, counts):
                with_jumps[t] += count > 0
        assert with_jumps[20.0] < with_jumps[0.1]

    def test_no_diagnostics_for_cdi(self, kingman):
        run = simulate_fv(kingman, 4, seed=1)
        with pytest.raises(DomainError):
            regime_diagnostics(run)

    def test_atom_drop(self, kingman):
        """Atom counts 1, 2, 1: the last event halves them"""
        graph = LookdownGraphN(
            n=4,
            window=(0.0, 1.0),
            events=(
                ReproductionEvent(0.1, (1, 2)),
                ReproductionEvent(0.2, (3, 4)),
                ReproductionEvent(0.3, (1, 2, 3, 4)),
            ),
        )
        run = simulate_fv(kingman, 4, graph=graph, initial_types=TYPES[:4])
        assert run.atom_counts == [1, 2, 1]
        assert cdi_diagnostics(run).max_relative_atom_drop == 1.0

    def test_atom_drop_is_cdi_only(self, dirac_half, small_graph):
        run = simulate_fv(dirac_half, 5, graph=small_graph, initial_types=TYPES)
        with pytest.raises(DomainError):
            cdi_diagnostics(run)
