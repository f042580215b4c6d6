"""
qlext - Layout predicates

Nesting, validity, extension, visibility and admissible pages. Every
solver builds on these; all functions are pure.
"""
from typing import Iterable, Mapping, Optional

from .config import config as default_config
from .errors import PreconditionError, StructuralError
from .models.layout import (
    AdmissiblePageTable,
    Edge,
    Graph,
    Instance,
    QueueLayout,
    SpineOrder,
    ValidationReport,
    edge_key,
    format_edge,
    nests,
)


def is_nesting(spine: SpineOrder, e1: Edge, e2: Edge) -> bool:
    """
    Check whether two edges nest under a spine order.

    Raises:
        PreconditionError: An endpoint is not on the spine, or e1 equals e2
    """
    for vertex in (*e1, *e2):
        if vertex not in spine:
            raise PreconditionError(f"Vertex {vertex!r} is not on the spine")
    if edge_key(*e1) == edge_key(*e2):
        raise PreconditionError(f"Cannot compare edge {format_edge(edge_key(*e1))} with itself")
    return nests(spine.rank, e1, e2)


def validate_layout(
    g: Graph, layout: QueueLayout, limit: Optional[int] = None
) -> ValidationReport:
    """
    Validate a queue layout of g.

    Args:
        g: Graph the layout is for
        layout: Layout to check
        limit: Stop after this many violations (default: config.max_violations)

    Returns:
        ValidationReport listing same-page nesting pairs

    Raises:
        StructuralError: The layout does not cover exactly V(g) and E(g)
    """
    if limit is None:
        limit = default_config.max_violations

    spine = layout.spine
    if len(spine) != len(g.vertices) or not all(v in spine for v in g.vertices):
        raise StructuralError("Spine does not cover exactly the vertices of the graph")
    if layout.assignment.edge_counts != g.edge_counts:
        missing = g.edge_counts - layout.assignment.edge_counts
        extra = layout.assignment.edge_counts - g.edge_counts
        raise StructuralError(
            f"Page assignment does not cover exactly the edges of the graph "
            f"(missing {[format_edge(e) for e in missing]}, extra {[format_edge(e) for e in extra]})"
        )

    rank = spine.rank
    violations = []
    for page, edges in layout.assignment.by_page.items():
        ordered = sorted(edges, key=lambda e: min(rank[e[0]], rank[e[1]]))
        for i, first in enumerate(ordered):
            for second in ordered[i + 1:]:
                if nests(rank, first, second):
                    violations.append((first, second, page))
                    if limit is not None and len(violations) >= limit:
                        return ValidationReport(tuple(violations), truncated=True)
    return ValidationReport(tuple(violations))


def extends(layout_g: QueueLayout, layout_h: QueueLayout) -> bool:
    """True if layout_g keeps every vertex order and edge page of layout_h"""
    if not layout_g.spine.respects(layout_h.spine):
        return False
    return not (layout_h.assignment.entry_counts - layout_g.assignment.entry_counts)


def sees(g: Graph, layout: QueueLayout, u: str, v: str, p: int) -> bool:
    """
    Check whether u and v are mutually visible on page p.

    Returns:
        True if adding the edge uv on page p keeps the layout valid

    Raises:
        PreconditionError: u equals v, a vertex is off the spine, or p is out of range
    """
    if u == v:
        raise PreconditionError("Visibility needs two distinct vertices")
    for vertex in (u, v):
        if vertex not in layout.spine:
            raise PreconditionError(f"Vertex {vertex!r} is not on the spine")
        if vertex not in g.vertex_set:
            raise PreconditionError(f"Vertex {vertex!r} is not in the graph")
    if not 1 <= p <= layout.page_count:
        raise PreconditionError(f"Page {p} is outside [1..{layout.page_count}]")

    rank = layout.spine.rank
    candidate = (u, v)
    return not any(nests(rank, candidate, edge) for edge in layout.assignment.by_page.get(p, ()))


def check_spine(inst: Instance, spine: SpineOrder) -> None:
    """
    Check that a spine places all of V(G) and extends the spine of H.

    Raises:
        PreconditionError: Either condition fails
    """
    if len(spine) != len(inst.g.vertices) or not all(v in spine for v in inst.g.vertices):
        raise PreconditionError("Spine does not place exactly the vertices of G")
    if not spine.respects(inst.layout_h.spine):
        raise PreconditionError("Spine does not extend the spine order of H")


def admissible_pages(
    inst: Instance,
    spine: SpineOrder,
    extra_old: Optional[Mapping[Edge, int]] = None,
    edges: Optional[Iterable[Edge]] = None,
) -> AdmissiblePageTable:
    """
    Compute admissible pages and conflicting new edges.

    Args:
        inst: Extension instance
        spine: Spine order of all of V(G), extending the spine of H
        extra_old: New edges to treat as old, with their fixed pages
        edges: New edges to tabulate (default: all of E_add not in extra_old)

    Returns:
        AdmissiblePageTable over the tabulated edges
    """
    check_spine(inst, spine)
    rank = spine.rank

    old_pages = {page: list(edges_on) for page, edges_on in inst.old_pages.items()}
    for edge, page in (extra_old or {}).items():
        old_pages.setdefault(page, []).append(edge_key(*edge))

    if edges is None:
        fixed = set(extra_old or ())
        edges = [e for e in inst.e_add if e not in fixed]
    new_edges = [edge_key(*e) for e in edges]

    admissible = {}
    for edge in new_edges:
        admissible[edge] = frozenset(
            page
            for page in range(1, inst.ell + 1)
            if not any(nests(rank, edge, old) for old in old_pages.get(page, ()))
        )

    conflicts: dict[Edge, set[Edge]] = {edge: set() for edge in new_edges}
    for i, first in enumerate(new_edges):
        for second in new_edges[i + 1:]:
            if nests(rank, first, second):
                conflicts[first].add(second)
                conflicts[second].add(first)

    return AdmissiblePageTable(
        admissible=admissible,
        conflicts={edge: frozenset(c) for edge, c in conflicts.items()},
    )
