"""
Tests for placement enumeration, flexible-edge pruning and the XP solver
"""
import sys

import pytest
from hypothesis import HealthCheck, given, settings

from qlext.config import PruneMode, SolverConfig
from qlext.errors import PreconditionError
from qlext.models.layout import Graph, Instance, SpineOrder
from qlext.models.result import SolveStatus
from qlext.services.branch_solvers import (
    Placement,
    enumerate_placements,
    placement_count,
    prune_flexible_edges,
    run_xp,
    solve_edges_only,
    solve_xp,
)
from qlext.services.oracle import solve_brute_force

from .conftest import assert_extension, instances, make_instance, random_instance


@pytest.fixture
def prune_example():
    return make_instance(
        ell=2,
        h_spine=["a", "b", "c", "d"],
        h_pages=[(("a", "d"), 1)],
        new_edges=[("a", "b"), ("b", "c")],
    )


def test_placement_count_and_uniqueness(two_new_vertices):
    h_spine = two_new_vertices.layout_h.spine
    placements = list(enumerate_placements(two_new_vertices))
    assert placement_count(two_new_vertices) == 5 * 6
    assert len(placements) == 30
    assert len({p.to_spine(h_spine).order for p in placements}) == 30


def test_placements_of_three_new_vertices():
    inst = make_instance(
        ell=1,
        h_spine=["a", "b"],
        new_vertices=["x", "y", "z"],
        new_edges=[("a", "x")],
    )
    spines = {p.to_spine(inst.layout_h.spine).order for p in enumerate_placements(inst)}
    assert placement_count(inst) == 3 * 4 * 5
    assert len(spines) == 60


def test_no_new_vertices_means_one_placement(nested_pair):
    assert placement_count(nested_pair) == 1
    assert [p.to_spine(nested_pair.layout_h.spine).order for p in enumerate_placements(nested_pair)] == [
        ("a", "b", "c", "d")
    ]


def test_placement_recovered_from_spine(two_new_vertices):
    h_spine = two_new_vertices.layout_h.spine
    for placement in enumerate_placements(two_new_vertices):
        assert Placement.from_spine(placement.to_spine(h_spine), h_spine) == placement
    with pytest.raises(PreconditionError):
        Placement.from_spine(SpineOrder(("b", "a", "c", "d", "u", "v")), h_spine)


def test_prune_original_keeps_threshold(prune_example):
    spine = prune_example.layout_h.spine
    kept, removed = prune_flexible_edges(prune_example, spine, PruneMode.ORIGINAL)
    assert kept == (("b", "c"),)
    assert removed == (("a", "b"),)


def test_prune_iterative_reaches_fixpoint(prune_example):
    spine = prune_example.layout_h.spine
    kept, removed = prune_flexible_edges(prune_example, spine, PruneMode.ITERATIVE)
    assert kept == ()
    assert removed == (("a", "b"), ("b", "c"))


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(instances(max_pages=3, new_vertices=(0, 0), max_deleted_edges=4))
def test_pruned_edges_keep_solvability(inst):
    status = solve_brute_force(inst).status
    for mode in PruneMode:
        kept, removed = prune_flexible_edges(inst, inst.layout_h.spine, mode)
        assert set(kept) | set(removed) == set(inst.e_add)
        reduced = Instance(
            ell=inst.ell,
            g=Graph(inst.g.vertices, inst.h.edges + kept, multi=inst.h.multi),
            h=inst.h,
            layout_h=inst.layout_h,
        )
        assert solve_brute_force(reduced).status is status


@pytest.mark.parametrize("mode", list(PruneMode))
def test_edges_only_solver(prune_example, mode):
    layout = solve_edges_only(prune_example, prune_example.layout_h.spine, mode)
    assert_extension(prune_example, layout)
    assert layout.page_of(("b", "c")) == 2


def test_edges_only_solver_handles_long_edge_lists(long_matching):
    layout = solve_edges_only(long_matching, long_matching.layout_h.spine)
    assert layout is not None
    assert set(layout.assignment.pages.values()) == {1}


def test_edges_only_solver_reports_unsolvable():
    inst = make_instance(
        ell=1,
        h_spine=["a", "b", "c", "d"],
        h_pages=[(("a", "d"), 1)],
        new_edges=[("b", "c")],
    )
    assert solve_edges_only(inst, inst.layout_h.spine) is None


def test_edges_only_solver_needs_full_spine(one_new_vertex):
    with pytest.raises(PreconditionError):
        solve_edges_only(one_new_vertex, one_new_vertex.layout_h.spine)


def test_xp_solves_one_new_vertex(one_new_vertex):
    result = solve_xp(one_new_vertex)
    assert result is not None
    layout, stats = result
    assert_extension(one_new_vertex, layout)
    assert stats.solutions_found == 1


def test_xp_counts_every_branch_when_unsolvable():
    # b-c nests inside a-d wherever x goes
    inst = make_instance(
        ell=1,
        h_spine=["a", "b", "c", "d"],
        h_pages=[(("a", "d"), 1)],
        new_vertices=["x"],
        new_edges=[("b", "c"), ("a", "x")],
    )
    layout, stats = run_xp(inst, SolverConfig(jobs=1))
    assert layout is None
    assert stats.branches_explored == placement_count(inst) == 5
    assert stats.solutions_found == 0
    assert solve_brute_force(inst).status is SolveStatus.UNSOLVABLE


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(instances())
def test_xp_agrees_with_oracle(inst):
    oracle = solve_brute_force(inst)
    for mode in PruneMode:
        layout, _ = run_xp(inst, SolverConfig(prune_mode=mode, jobs=1))
        assert (layout is not None) == (oracle.status is SolveStatus.SOLVED)
        if layout is not None:
            assert_extension(inst, layout)
            assert layout.spine == oracle.layout.spine


@pytest.mark.parametrize("seed", range(5))
def test_known_solvable_instances_are_solved(seed):
    inst = random_instance(seed, vertices=6, delete_vertices=2, delete_edges=2)
    assert inst.known_solvable
    result = solve_xp(inst, SolverConfig(jobs=1))
    assert result is not None
    assert_extension(inst, result[0])


def test_parallel_run_matches_sequential():
    inst = random_instance(3, vertices=6, delete_vertices=2, delete_edges=2, independent=True)
    sequential, seq_stats = run_xp(inst, SolverConfig(jobs=1))
    parallel, par_stats = run_xp(inst, SolverConfig(jobs=2, chunk_size=4))
    assert parallel == sequential
    assert par_stats == seq_stats


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
