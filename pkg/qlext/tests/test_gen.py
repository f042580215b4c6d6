"""
Tests for the clique reduction and the random instance generator
"""
import sys
from collections import Counter
from math import comb

import pytest

from qlext.config import SolverConfig
from qlext.errors import GenerationError, PreconditionError, ValidationError
from qlext.models.layout import Graph, PageAssignment, QueueLayout, SpineOrder, edge_key
from qlext.models.result import Algorithm
from qlext.services.gen import (
    DeletionPolicy,
    MccInstance,
    RandomGenConfig,
    ReductionProperty,
    clique_solution,
    colorful_cliques,
    gen_random,
    random_mcc,
    reduce_mcc,
    verify_reduction_properties,
)
from qlext.services.solver_service import SolverService

from .conftest import assert_extension

SERVICE = SolverService(SolverConfig(jobs=1))


def _mcc(coloring, edges):
    return MccInstance(graph=Graph(tuple(coloring), tuple(edges)), k=max(coloring.values()), coloring=coloring)


@pytest.fixture
def single_edge():
    return _mcc({"p": 1, "q": 2}, [("p", "q")])


@pytest.fixture
def triangle():
    return _mcc({"r": 1, "s": 2, "t": 3}, [("r", "s"), ("r", "t"), ("s", "t")])


@pytest.fixture
def two_matchings():
    """Two disjoint edges between the same pair of colors"""
    return _mcc({"a1": 1, "a2": 1, "b1": 2, "b2": 2}, [("a1", "b1"), ("a2", "b2")])


def _twists_collide(mcc):
    """Two edges of one color pair at class positions (i, j) and (i + 1, j + 1)"""
    position = {v: i for members in mcc.classes.values() for i, v in enumerate(members)}

    def spot(edge):
        u, v = sorted(edge, key=mcc.coloring.get)
        return mcc.coloring[u], mcc.coloring[v], position[u], position[v]

    spots = {spot(e) for e in mcc.graph.edges}
    return any((a, b, i + 1, j + 1) in spots for a, b, i, j in spots)


def _reduce(mcc, simple):
    """Reduction of either form, None when the simple form is refused"""
    if simple and _twists_collide(mcc):
        with pytest.raises(GenerationError):
            reduce_mcc(mcc, simple=True)
        return None
    return reduce_mcc(mcc, simple=simple)


def _repaint(layout, edge, page):
    edge = edge_key(*edge)
    entries = tuple((e, page if e == edge else p) for e, p in layout.assignment.entries)
    return QueueLayout(layout.spine, PageAssignment(entries, layout.page_count))


def test_reduction_sizes(single_edge):
    art = reduce_mcc(single_edge)
    inst = art.instance
    assert inst.ell == 2
    assert art.dummy_page == 2
    assert len(inst.h.vertices) == 13
    assert len(inst.h.edges) == 18
    assert inst.kappa == 7
    assert inst.v_add == ("x1", "x2")
    assert inst.meta["generator"] == "mcc"
    assert inst.meta["k"] == 2


@pytest.mark.parametrize("simple", [False, True])
def test_reduction_size_formulas(triangle, simple):
    art = reduce_mcc(triangle, simple=simple)
    inst = art.instance
    k, n, m = 3, 3, 3
    bottoms = (2 * m + 1) if simple else 3
    assert len(inst.h.vertices) == (k + 1) * bottoms + n + k
    assert len(inst.h.edges) == 12 * m + 3 * k
    assert inst.ell == m + 1
    assert inst.n_add == k
    assert inst.m_add == 2 * k + k * (k - 1) // 2
    assert inst.h.multi is not simple
    assert art.allow_multi is not simple


def test_edgeless_clique_input_is_unsolvable():
    art = reduce_mcc(_mcc({"p": 1, "q": 2}, []))
    assert art.instance.ell == 1
    result = SERVICE.solve(art.instance)
    assert not result.solved
    with pytest.raises(PreconditionError):
        verify_reduction_properties(art)


@pytest.mark.parametrize("simple", [False, True])
@pytest.mark.parametrize("seed", range(4))
def test_two_color_reduction_matches_clique_existence(seed, simple):
    mcc = random_mcc(k=2, class_size=2, edge_probability=0.3, seed=seed)
    art = _reduce(mcc, simple)
    if art is None:
        return
    result = SERVICE.solve(art.instance)
    assert result.algorithm is Algorithm.TWO_VERTEX
    assert result.solved == any(True for _ in colorful_cliques(mcc))
    if result.solved:
        assert verify_reduction_properties(art, result.layout).ok


def test_simple_reduction_refuses_shared_twists(two_matchings):
    with pytest.raises(GenerationError, match="a1--b1 and a2--b2"):
        reduce_mcc(two_matchings, simple=True)

    multi = reduce_mcc(two_matchings).instance.h
    assert multi.multi
    assert Counter(multi.edges)[edge_key("u1.2", "u2.2")] == 2


def test_simple_reduction_of_crossed_matchings():
    crossed = _mcc({"a1": 1, "a2": 1, "b1": 2, "b2": 2}, [("a1", "b2"), ("a2", "b1")])
    h = reduce_mcc(crossed, simple=True).instance.h
    assert not h.multi
    assert len(set(h.edges)) == len(h.edges)


@pytest.mark.slow
@pytest.mark.parametrize("simple", [False, True])
@pytest.mark.parametrize("k", [2, 3])
def test_reduction_sweep(k, simple):
    checked = 0
    for class_size in (1, 2):
        for probability in (0.3, 0.6, 0.9):
            for seed in range(3 if k == 2 else 1):
                mcc = random_mcc(k=k, class_size=class_size, edge_probability=probability, seed=seed)
                art = _reduce(mcc, simple)
                if art is None:
                    continue
                inst = art.instance
                n, m = len(mcc.graph.vertices), len(mcc.graph.edges)
                bottoms = (2 * m + 1) if simple else 3
                assert len(inst.h.vertices) == (k + 1) * bottoms + n + k
                assert len(inst.h.edges) == 12 * m + 3 * k
                assert inst.ell == m + 1
                assert inst.kappa == 3 * k + comb(k, 2)
                if simple:
                    assert not inst.h.multi
                    assert len(set(inst.h.edges)) == len(inst.h.edges)

                result = SERVICE.solve(inst)
                assert result.solved == any(True for _ in colorful_cliques(mcc))
                if result.solved:
                    assert_extension(inst, result.layout)
                    assert verify_reduction_properties(art, result.layout).ok
                checked += 1
    assert checked >= 3


@pytest.mark.slow
@pytest.mark.parametrize("simple", [False, True])
def test_three_color_reduction_with_xp(triangle, simple):
    art = reduce_mcc(triangle, simple=simple)
    result = SERVICE.solve(art.instance, Algorithm.XP)
    assert result.solved
    assert verify_reduction_properties(art, result.layout).ok


@pytest.mark.slow
def test_three_color_reduction_without_clique():
    mcc = _mcc({"r": 1, "s": 2, "t": 3}, [("r", "s"), ("s", "t")])
    art = reduce_mcc(mcc)
    assert not SERVICE.solve(art.instance, Algorithm.XP).solved


@pytest.mark.parametrize("simple", [False, True])
def test_clique_solution_extends_h(triangle, simple):
    art = reduce_mcc(triangle, simple=simple)
    (clique,) = list(colorful_cliques(triangle))
    layout = clique_solution(art, clique)
    assert_extension(art.instance, layout)
    assert verify_reduction_properties(art, layout).ok


def test_clique_solution_rejects_non_cliques(two_matchings):
    art = reduce_mcc(two_matchings)
    with pytest.raises(ValidationError):
        clique_solution(art, ["a1", "b2"])
    with pytest.raises(ValidationError):
        clique_solution(art, ["a1", "a2"])


def test_property_check_flags_fixation_pages(single_edge):
    art = reduce_mcc(single_edge)
    layout = clique_solution(art, ["p", "q"])
    broken = _repaint(layout, ("x1", "u1.bot"), 1)
    assert ReductionProperty.FIXATION_PAGES in verify_reduction_properties(art, broken).failed

    broken = _repaint(layout, ("x1", "x2"), art.dummy_page)
    assert ReductionProperty.FIXATION_PAGES in verify_reduction_properties(art, broken).failed


def test_property_check_flags_interval_placement(single_edge):
    art = reduce_mcc(single_edge)
    layout = clique_solution(art, ["p", "q"])
    order = [v for v in layout.spine.order if v != "x1"]
    order.insert(0, "x1")
    moved = QueueLayout(SpineOrder(tuple(order)), layout.assignment)
    report = verify_reduction_properties(art, moved)
    assert report.failed == {ReductionProperty.INTERVAL_PLACEMENT}


def test_property_check_flags_edge_colors(triangle):
    art = reduce_mcc(triangle)
    layout = clique_solution(art, ["r", "s", "t"])
    wrong_page = art.page_of_edge[edge_key("r", "t")]
    broken = _repaint(layout, ("x1", "x2"), wrong_page)
    assert ReductionProperty.EDGE_COLORS in verify_reduction_properties(art, broken).failed


def test_property_check_flags_edge_gadget(two_matchings):
    art = reduce_mcc(two_matchings)
    layout = clique_solution(art, ["a1", "b1"])
    other_page = art.page_of_edge[edge_key("a2", "b2")]
    broken = _repaint(layout, ("x1", "x2"), other_page)
    assert verify_reduction_properties(art, broken).failed == {ReductionProperty.EDGE_GADGET}


def test_colorful_cliques(triangle, two_matchings):
    assert list(colorful_cliques(triangle)) == [("r", "s", "t")]
    assert list(colorful_cliques(two_matchings)) == [("a1", "b1"), ("a2", "b2")]


def test_clique_input_validation():
    with pytest.raises(ValidationError):
        _mcc({"p": 1, "q": 1}, [("p", "q")])
    with pytest.raises(ValidationError):
        MccInstance(graph=Graph(("p", "q")), k=3, coloring={"p": 1, "q": 2})
    with pytest.raises(ValidationError):
        MccInstance(graph=Graph(("p", "q")), k=2, coloring={"p": 1})
    with pytest.raises(ValidationError):
        random_mcc(k=2, class_size=0, edge_probability=0.5)


def test_random_mcc_is_deterministic():
    first = random_mcc(k=3, class_size=2, edge_probability=0.5, seed=7)
    again = random_mcc(k=3, class_size=2, edge_probability=0.5, seed=7)
    assert first == again
    assert first.classes[2] == ("v2_1", "v2_2")


def test_gen_random_is_deterministic():
    cfg = RandomGenConfig(vertex_count=8, edge_probability=0.4, page_count=2, seed=11)
    first, again = gen_random(cfg), gen_random(cfg)
    assert first == again
    assert first.known_solvable
    assert first.n_add == 1
    assert first.meta["seed"] == 11


def test_gen_random_without_edges_or_deletions():
    cfg = RandomGenConfig(
        vertex_count=5, edge_probability=0.0, page_count=1, deletion_policy=DeletionPolicy(0, 0)
    )
    inst = gen_random(cfg)
    assert not inst.g.edges
    assert inst.kappa == 0
    assert set(inst.h.vertices) == set(inst.g.vertices)
    assert SERVICE.solve(inst).algorithm is Algorithm.FIXED_ORDER


def test_gen_random_independent_layout_is_unknown():
    cfg = RandomGenConfig(vertex_count=6, edge_probability=0.5, seed=3, independent_h_layout=True)
    assert gen_random(cfg).known_solvable is None


def test_gen_config_validation():
    with pytest.raises(ValidationError):
        RandomGenConfig(vertex_count=2, deletion_policy=DeletionPolicy(vertices=3))
    with pytest.raises(ValidationError):
        RandomGenConfig(edge_probability=1.5)
    with pytest.raises(ValidationError):
        DeletionPolicy(vertices=-1)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
