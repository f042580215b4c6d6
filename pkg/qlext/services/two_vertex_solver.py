"""
Two Missing Vertices Solver

Polynomial-time extension when exactly two vertices (and their incident
edges) are missing. Every branch fixes the spine and the page of the edge
between the two new vertices; the new edges are then settled by the
simple-case filter, the two remove-safe rules and a residual assignment,
and removed edges are put back in reverse order.
"""
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from itertools import product
from typing import Iterable, Iterator, Mapping, Optional, Sequence
import logging

from ..config import SolverConfig, config as default_config
from ..core import admissible_pages, validate_layout
from ..errors import ConsistencyError, PreconditionError
from ..models.layout import (
    AdmissiblePageTable,
    Edge,
    Graph,
    Instance,
    PageAssignment,
    QueueLayout,
    SpineOrder,
    edge_key,
    format_edge,
    nests,
)
from ..models.result import BranchStats
from .branch_solvers import Placement
from .parallel import first_success

logger = logging.getLogger(__name__)


class RemovalRule(str, Enum):
    """Which remove-safe rule took an edge out"""

    # v-x edges with u before x
    RIGHT = "right"
    # u-y edges with y before v
    LEFT = "left"


@dataclass(frozen=True)
class TwoVertexBranch:
    """Spine positions of the new vertices u before v, plus fixed pages"""

    u: str
    v: str
    gap_u: int
    gap_v: int
    # Page of uv, None when uv is not an edge of G
    page_uv: Optional[int] = None
    # Pages of new edges between old vertices
    fixed_pages: Mapping[Edge, int] = field(default_factory=dict)

    def to_spine(self, h_spine: SpineOrder) -> SpineOrder:
        if self.gap_u == self.gap_v:
            within = {self.gap_u: (self.u, self.v)}
        else:
            within = {self.gap_u: (self.u,), self.gap_v: (self.v,)}
        placement = Placement(gap_of={self.u: self.gap_u, self.v: self.gap_v}, within_gap=within)
        return placement.to_spine(h_spine)

    @property
    def fixed(self) -> dict[Edge, int]:
        """Every new edge this branch treats as old, with its page"""
        pages = dict(self.fixed_pages)
        if self.page_uv is not None:
            pages[edge_key(self.u, self.v)] = self.page_uv
        return pages


@dataclass(frozen=True)
class SimpleCaseResult:
    # Fallback page of every removed edge
    forced: Mapping[Edge, int]
    removed: tuple[Edge, ...]
    infeasible: bool = False


@dataclass(frozen=True)
class RemovalEntry:
    """One remove-safe removal with the conflicting edges it may repaint"""

    edge: Edge
    rule: RemovalRule
    # Conflicting new edges, sorted so that the last one is repainted first
    chain: tuple[Edge, ...] = ()


def _require_two_new(inst: Instance) -> None:
    if inst.n_add != 2:
        raise PreconditionError(f"Two-vertex solver needs exactly 2 new vertices, got {inst.n_add}")


def _new_pair(inst: Instance, spine: SpineOrder) -> tuple[str, str]:
    """The two new vertices in spine order"""
    first, second = inst.v_add
    return (first, second) if spine.precedes(first, second) else (second, first)


def _other_end(edge: Edge, vertex: str) -> str:
    return edge[1] if edge[0] == vertex else edge[0]


def simple_case_filter(table: AdmissiblePageTable) -> SimpleCaseResult:
    """
    Set aside edges that own a page none of their conflicts can use.

    Returns:
        SimpleCaseResult; infeasible when some edge has no admissible page
    """
    if any(not pages for pages in table.admissible.values()):
        return SimpleCaseResult(forced={}, removed=(), infeasible=True)

    forced: dict[Edge, int] = {}
    for edge in table.edges:
        taken: set[int] = set()
        for other in table.conflicts[edge]:
            taken |= table.admissible[other]
        own = table.admissible[edge] - taken
        if own:
            forced[edge] = min(own)
    return SimpleCaseResult(forced=forced, removed=tuple(forced))


def reduce_remove_safe(
    inst: Instance,
    spine: SpineOrder,
    table: AdmissiblePageTable,
    edges: Optional[Iterable[Edge]] = None,
) -> tuple[tuple[Edge, ...], tuple[RemovalEntry, ...]]:
    """
    Remove the new edges both remove-safe rules allow to drop.

    With u before v on the spine, the right rule drops every v-x edge with u
    before x and the left rule every u-y edge with y before v, provided the
    edge has at least two admissible pages. The right pass runs first.

    Args:
        inst: Instance with two new vertices
        spine: Spine of G for the branch
        table: Admissible pages under this spine
        edges: Edges still in play (default: every edge of the table)

    Returns:
        (surviving edges, removal log in removal order)

    Raises:
        PreconditionError: The instance does not miss exactly two vertices
    """
    _require_two_new(inst)
    u, v = _new_pair(inst, spine)
    rank = spine.rank
    pending = list(table.edges if edges is None else edges)

    log: list[RemovalEntry] = []

    def drop(pivot: str, anchor: str, rule: RemovalRule, incident_to: str, descending: bool) -> None:
        for edge in list(pending):
            if pivot not in edge or len(table.admissible[edge]) < 2:
                continue
            end = _other_end(edge, pivot)
            if end in (u, v):
                continue
            if rule is RemovalRule.RIGHT and not rank[anchor] < rank[end]:
                continue
            if rule is RemovalRule.LEFT and not rank[end] < rank[anchor]:
                continue
            chain = sorted(
                (c for c in table.conflicts[edge] if incident_to in c),
                key=lambda c: rank[_other_end(c, incident_to)],
                reverse=descending,
            )
            pending.remove(edge)
            log.append(RemovalEntry(edge=edge, rule=rule, chain=tuple(chain)))

    drop(v, u, RemovalRule.RIGHT, incident_to=u, descending=False)
    drop(u, v, RemovalRule.LEFT, incident_to=v, descending=True)
    return tuple(pending), tuple(log)


def assign_residual(
    surviving: Sequence[Edge], table: AdmissiblePageTable
) -> Optional[dict[Edge, int]]:
    """
    Assign the edges left after both reductions.

    Edges with a single admissible page take it; every other edge takes its
    lowest admissible page not used by an assigned conflicting edge.

    Returns:
        Pages of the surviving edges, or None if some edge has no page left
    """
    pages: dict[Edge, int] = {}
    singletons = [e for e in surviving if len(table.admissible[e]) == 1]
    for edge in singletons:
        (page,) = table.admissible[edge]
        if any(pages.get(other) == page for other in table.conflicts[edge]):
            logger.debug(f"Forced edges clash with {format_edge(edge)} on page {page}")
            return None
        pages[edge] = page

    for edge in surviving:
        if edge in pages:
            continue
        busy = {pages[other] for other in table.conflicts[edge] if other in pages}
        free = sorted(table.admissible[edge] - busy)
        if not free:
            logger.debug(f"No page left for {format_edge(edge)}")
            return None
        pages[edge] = free[0]
    return pages


def reinsert_removed(
    layout: QueueLayout,
    log: Sequence[RemovalEntry],
    table: AdmissiblePageTable,
) -> QueueLayout:
    """
    Put the remove-safe edges back, latest removal first.

    An edge goes on its lowest admissible page free of conflicting edges.
    When every admissible page is taken, its conflict chain is repainted
    from the end so that all chain edges share the page of the last one,
    which frees another admissible page.

    Raises:
        ConsistencyError: Repainting did not free a page
    """
    pages = {edge: page for edge, page in layout.assignment.entries if edge in table.admissible}
    base = tuple((edge, page) for edge, page in layout.assignment.entries if edge not in table.admissible)

    for entry in reversed(log):
        edge = entry.edge
        admissible = table.admissible[edge]

        def free_pages() -> list[int]:
            busy = {pages[other] for other in table.conflicts[edge] if other in pages}
            return sorted(admissible - busy)

        free = free_pages()
        if not free:
            chain = [c for c in entry.chain if c in pages and pages[c] in admissible]
            for i in range(len(chain) - 2, -1, -1):
                pages[chain[i]] = pages[chain[i + 1]]
            logger.debug(f"Repainted {len(chain)} edges to make room for {format_edge(edge)}")
            free = free_pages()
            if not free:
                raise ConsistencyError(f"Repainting freed no page for {format_edge(edge)}")
        pages[edge] = free[0]

    return QueueLayout(layout.spine, PageAssignment(base + tuple(pages.items()), layout.page_count))


def check_propagation(table: AdmissiblePageTable, spine: SpineOrder, u: str, v: str) -> None:
    """
    Check that admissible pages propagate along nested edges.

    For v-x, u-y, u-z with u < x < y < z and v < y, and mirrored for u-x,
    v-y, v-z with z < y < x < v and y < u: every page admissible for the
    first and the last edge is admissible for the middle one.

    Raises:
        ConsistencyError: A triple breaks the property
    """
    rank = spine.rank
    at_u = [(rank[_other_end(e, u)], e) for e in table.edges if u in e and v not in e]
    at_v = [(rank[_other_end(e, v)], e) for e in table.edges if v in e and u not in e]
    ru, rv = rank[u], rank[v]

    def check(first: Edge, middle: Edge, last: Edge) -> None:
        shared = table.admissible[first] & table.admissible[last]
        if not shared <= table.admissible[middle]:
            raise ConsistencyError(
                f"Pages {sorted(shared - table.admissible[middle])} admissible for "
                f"{format_edge(first)} and {format_edge(last)} but not for {format_edge(middle)}"
            )

    for x, first in at_v:
        for y, middle in at_u:
            for z, last in at_u:
                if ru < x < y < z and rv < y:
                    check(first, middle, last)
    for x, first in at_u:
        for y, middle in at_v:
            for z, last in at_v:
                if z < y < x < rv and y < ru:
                    check(first, middle, last)


def _fixed_page_choices(inst: Instance) -> list[dict[Edge, int]]:
    """Page choices for new edges between old vertices that keep H valid"""
    rank = inst.layout_h.spine.rank
    edges = inst.e_add_h
    choices = []
    for pages in product(range(1, inst.ell + 1), repeat=len(edges)):
        ok = True
        for i, (edge, page) in enumerate(zip(edges, pages)):
            blockers = list(inst.old_pages.get(page, ())) + [
                other for other, other_page in zip(edges[:i], pages[:i]) if other_page == page
            ]
            if any(nests(rank, edge, other) for other in blockers):
                ok = False
                break
        if ok:
            choices.append(dict(zip(edges, pages)))
    return choices


def enumerate_branches(inst: Instance) -> Iterator[TwoVertexBranch]:
    """
    Yield the branches of an instance with two new vertices.

    Gaps run lexicographically with the new vertices in identifier order;
    sharing a gap yields both orders. Then the page of uv ascending, then
    pages of new edges between old vertices.
    """
    _require_two_new(inst)
    a, b = sorted(inst.v_add)
    has_uv = edge_key(a, b) in set(inst.e_add)
    uv_pages: list[Optional[int]] = list(range(1, inst.ell + 1)) if has_uv else [None]
    choices = _fixed_page_choices(inst)
    slots = len(inst.layout_h.spine) + 1

    for gap_a in range(slots):
        for gap_b in range(slots):
            if gap_a < gap_b:
                orders = [(a, gap_a, b, gap_b)]
            elif gap_b < gap_a:
                orders = [(b, gap_b, a, gap_a)]
            else:
                orders = [(a, gap_a, b, gap_b), (b, gap_b, a, gap_a)]
            for u, gap_u, v, gap_v in orders:
                for page_uv in uv_pages:
                    for fixed in choices:
                        yield TwoVertexBranch(u, v, gap_u, gap_v, page_uv, fixed)


def _assert_valid(spine: SpineOrder, assignment: PageAssignment, stage: str) -> None:
    graph = Graph(vertices=spine.order, edges=tuple(e for e, _ in assignment.entries), multi=True)
    report = validate_layout(graph, QueueLayout(spine, assignment))
    if not report.ok:
        raise ConsistencyError(f"Invalid layout after {stage}: {'; '.join(report.describe())}")


def _solve_branch(inst: Instance, debug: bool, branch: TwoVertexBranch) -> Optional[QueueLayout]:
    spine = branch.to_spine(inst.layout_h.spine)
    rank = spine.rank
    fixed = branch.fixed

    if branch.page_uv is not None:
        uv = edge_key(branch.u, branch.v)
        blockers = list(inst.old_pages.get(branch.page_uv, ())) + [
            e for e, p in branch.fixed_pages.items() if p == branch.page_uv
        ]
        if any(nests(rank, uv, other) for other in blockers):
            return None

    table = admissible_pages(inst, spine, extra_old=fixed)
    if debug:
        check_propagation(table, spine, branch.u, branch.v)

    simple = simple_case_filter(table)
    if simple.infeasible:
        return None
    remaining = [e for e in table.edges if e not in simple.forced]
    surviving, log = reduce_remove_safe(inst, spine, table, remaining)
    residual = assign_residual(surviving, table)
    if residual is None:
        return None

    partial_layout = QueueLayout(spine, inst.layout_h.assignment.extended({**fixed, **residual}))
    if debug:
        _assert_valid(spine, partial_layout.assignment, "residual assignment")
    restored = reinsert_removed(partial_layout, log, table)
    if debug:
        _assert_valid(spine, restored.assignment, "re-insertion")

    pages = {**restored.assignment.pages, **simple.forced}
    layout = QueueLayout(spine, inst.layout_h.assignment.extended({e: pages[e] for e in inst.e_add}))
    report = validate_layout(inst.g, layout)
    if not report.ok:
        raise ConsistencyError(
            f"Two-vertex branch {branch} produced an invalid layout: {'; '.join(report.describe())}"
        )
    return layout


def solve_two_vertices(
    inst: Instance, config: Optional[SolverConfig] = None
) -> Optional[tuple[QueueLayout, BranchStats]]:
    """
    Solve an instance missing exactly two vertices.

    Returns:
        (layout, branch statistics), or None if the instance is unsolvable

    Raises:
        PreconditionError: The instance does not miss exactly two vertices
    """
    layout, stats = run_two_vertices(inst, config)
    return None if layout is None else (layout, stats)


def run_two_vertices(
    inst: Instance, config: Optional[SolverConfig] = None
) -> tuple[Optional[QueueLayout], BranchStats]:
    """solve_two_vertices keeping the statistics of unsuccessful runs"""
    _require_two_new(inst)
    config = config or default_config
    stats = BranchStats()
    logger.info(f"Two-vertex search (m_add={inst.m_add}, ell={inst.ell}, |V(H)|={len(inst.h.vertices)})")
    layout = first_success(
        enumerate_branches(inst),
        partial(_solve_branch, inst, config.debug_checks),
        stats,
        jobs=config.jobs,
        chunk_size=config.chunk_size,
    )
    logger.info(f"Two-vertex search done: explored={stats.branches_explored}, solved={layout is not None}")
    return layout, stats
