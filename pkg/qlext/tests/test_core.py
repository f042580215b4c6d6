"""
Tests for the layout predicates and the domain models
"""
import sys

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from qlext.core import admissible_pages, check_spine, extends, is_nesting, sees, validate_layout
from qlext.errors import PreconditionError, StructuralError, ValidationError
from qlext.models.layout import Graph, Instance, PageAssignment, QueueLayout, SpineOrder
from qlext.services.branch_solvers import enumerate_placements

from .conftest import instances, make_instance

SPINE = SpineOrder(("a", "b", "c", "d"))


def test_nesting_needs_strict_containment():
    assert is_nesting(SPINE, ("a", "d"), ("b", "c"))
    assert is_nesting(SPINE, ("c", "b"), ("d", "a"))


def test_twist_and_shared_endpoint_do_not_nest():
    assert not is_nesting(SPINE, ("a", "c"), ("b", "d"))
    assert not is_nesting(SPINE, ("a", "d"), ("a", "c"))
    assert not is_nesting(SPINE, ("a", "b"), ("c", "d"))


def test_nesting_rejects_bad_arguments():
    with pytest.raises(PreconditionError):
        is_nesting(SPINE, ("a", "z"), ("b", "c"))
    with pytest.raises(PreconditionError):
        is_nesting(SPINE, ("a", "b"), ("b", "a"))


def test_validate_layout_lists_same_page_nesting():
    g = Graph(("a", "b", "c", "d"), (("a", "d"), ("b", "c")))
    same_page = QueueLayout(SPINE, PageAssignment(((("a", "d"), 1), (("b", "c"), 1)), 2))
    report = validate_layout(g, same_page)
    assert not report.ok
    assert report.violations == ((("a", "d"), ("b", "c"), 1),)
    assert report.describe() == ["page 1: a--d and b--c nest"]

    split = QueueLayout(SPINE, PageAssignment(((("a", "d"), 1), (("b", "c"), 2)), 2))
    assert validate_layout(g, split).ok


def test_validate_layout_respects_violation_cap():
    g = Graph(("a", "b", "c", "d", "e", "f"), (("a", "f"), ("b", "e"), ("c", "d")))
    spine = SpineOrder(g.vertices)
    layout = QueueLayout(spine, PageAssignment(tuple((e, 1) for e in g.edges), 1))
    assert len(validate_layout(g, layout).violations) == 3
    capped = validate_layout(g, layout, limit=1)
    assert len(capped.violations) == 1
    assert capped.truncated


def test_validate_layout_rejects_partial_layouts():
    g = Graph(("a", "b", "c", "d"), (("a", "d"), ("b", "c")))
    with pytest.raises(StructuralError):
        validate_layout(g, QueueLayout(SPINE, PageAssignment(((("a", "d"), 1),), 1)))
    with pytest.raises(StructuralError):
        validate_layout(g, QueueLayout(SpineOrder(("a", "b", "c")), PageAssignment((), 1)))


def test_extends_checks_order_and_pages():
    layout_h = QueueLayout(SpineOrder(("a", "c")), PageAssignment(((("a", "c"), 2),), 2))
    good = QueueLayout(SpineOrder(("a", "b", "c")), PageAssignment(((("a", "c"), 2), (("a", "b"), 1)), 2))
    moved = QueueLayout(SpineOrder(("c", "b", "a")), PageAssignment(((("a", "c"), 2), (("a", "b"), 1)), 2))
    repainted = QueueLayout(SpineOrder(("a", "b", "c")), PageAssignment(((("a", "c"), 1), (("a", "b"), 1)), 2))
    assert extends(good, layout_h)
    assert not extends(moved, layout_h)
    assert not extends(repainted, layout_h)


def test_sees_on_pages():
    g = Graph(("a", "b", "c", "d"), (("a", "d"),))
    layout = QueueLayout(SPINE, PageAssignment(((("a", "d"), 1),), 2))
    assert not sees(g, layout, "b", "c", 1)
    assert sees(g, layout, "b", "c", 2)
    assert sees(g, layout, "a", "c", 1)
    with pytest.raises(PreconditionError):
        sees(g, layout, "b", "b", 1)
    with pytest.raises(PreconditionError):
        sees(g, layout, "b", "c", 3)


def test_admissible_pages_and_conflicts(nested_pair):
    spine = nested_pair.layout_h.spine
    table = admissible_pages(nested_pair, spine)
    assert table.pages(("b", "c")) == frozenset({2})
    assert table.conflicts[("b", "c")] == frozenset()


def test_admissible_pages_with_extra_old_edges():
    inst = make_instance(
        ell=2,
        h_spine=["a", "b", "c", "d", "e", "f"],
        new_edges=[("a", "f"), ("b", "e"), ("c", "d")],
    )
    spine = inst.layout_h.spine
    table = admissible_pages(inst, spine, extra_old={("a", "f"): 1})
    assert set(table.edges) == {("b", "e"), ("c", "d")}
    assert table.pages(("b", "e")) == frozenset({2})
    assert table.conflicts[("b", "e")] == frozenset({("c", "d")})


def test_check_spine_requires_extension(one_new_vertex):
    check_spine(one_new_vertex, SpineOrder(("a", "x", "b", "c")))
    with pytest.raises(PreconditionError):
        check_spine(one_new_vertex, SpineOrder(("b", "a", "x", "c")))
    with pytest.raises(PreconditionError):
        check_spine(one_new_vertex, SpineOrder(("a", "b", "c")))


def test_instance_exposes_new_elements(two_new_vertices):
    assert two_new_vertices.v_add == ("u", "v")
    assert two_new_vertices.m_add == 5
    assert two_new_vertices.kappa == 7
    assert two_new_vertices.e_add_h == ()


def test_instance_rejects_invalid_layout_of_h():
    with pytest.raises(ValidationError):
        make_instance(ell=1, h_spine=["a", "b", "c", "d"], h_pages=[(("a", "d"), 1), (("b", "c"), 1)])


def test_instance_rejects_page_count_mismatch():
    h = Graph(("a", "b"), (("a", "b"),))
    layout = QueueLayout(SpineOrder(("a", "b")), PageAssignment(((("a", "b"), 1),), 1))
    with pytest.raises(ValidationError):
        Instance(ell=2, g=h, h=h, layout_h=layout)


def test_instance_rejects_spine_not_covering_h():
    h = Graph(("a", "b", "c"), (("a", "b"),))
    layout = QueueLayout(SpineOrder(("a", "b")), PageAssignment(((("a", "b"), 1),), 1))
    with pytest.raises(StructuralError):
        Instance(ell=1, g=h, h=h, layout_h=layout)


def test_instance_rejects_parallel_new_edges():
    with pytest.raises(ValidationError):
        make_instance(
            ell=2,
            h_spine=["a", "b"],
            h_pages=[(("a", "b"), 1)],
            new_edges=[("b", "a")],
            multi=True,
        )


def test_graph_rejects_loops_and_duplicates():
    with pytest.raises(ValidationError):
        Graph(("a",), (("a", "a"),))
    with pytest.raises(ValidationError):
        Graph(("a", "b"), (("a", "b"), ("b", "a")))
    assert Graph(("a", "b"), (("a", "b"), ("b", "a")), multi=True).has_parallel_edges


def test_page_assignment_range():
    with pytest.raises(ValidationError):
        PageAssignment(((("a", "b"), 3),), 2)


@settings(max_examples=100, deadline=None)
@given(st.permutations(["a", "b", "c", "d", "e", "f"]), st.data())
def test_nesting_is_symmetric_and_transitive(order, data):
    spine = SpineOrder(tuple(order))
    pairs = [(u, v) for i, u in enumerate(order) for v in order[i + 1:]]
    e1, e2, e3 = (data.draw(st.sampled_from(pairs)) for _ in range(3))
    if e1 != e2:
        assert is_nesting(spine, e1, e2) == is_nesting(spine, e2, e1)
    if e1 != e2 and e2 != e3 and e1 != e3 and is_nesting(spine, e1, e2) and is_nesting(spine, e2, e3):
        starts = [spine.rank[spine.orient(e)[0]] for e in (e1, e2, e3)]
        if starts[0] < starts[1] < starts[2]:
            assert is_nesting(spine, e1, e3)


@settings(max_examples=50, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(instances(), st.data())
def test_admissible_pages_agree_with_visibility(inst, data):
    placements = list(enumerate_placements(inst))
    placement = data.draw(st.sampled_from(placements))
    spine = placement.to_spine(inst.layout_h.spine)
    table = admissible_pages(inst, spine)

    g_old = Graph(spine.order, inst.h.edges, multi=inst.h.multi)
    layout = QueueLayout(spine, inst.layout_h.assignment)
    for u, v in inst.e_add:
        for page in range(1, inst.ell + 1):
            assert (page in table.pages((u, v))) == sees(g_old, layout, u, v, page)
            assert sees(g_old, layout, u, v, page) == sees(g_old, layout, v, u, page)
    for edge, others in table.conflicts.items():
        for other in others:
            assert edge in table.conflicts[other]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
