"""
Branching Solvers

Edges-only solver (missing edges on a fixed spine) with flexible-edge
pruning, and the placement-enumeration solver for missing vertices and
edges.
"""
from dataclasses import dataclass
from functools import partial
from itertools import permutations, product
from typing import Iterator, Mapping, Optional
import logging

from ..config import PruneMode, SolverConfig, config as default_config
from ..core import admissible_pages, check_spine
from ..errors import ConsistencyError, PreconditionError
from ..models.layout import AdmissiblePageTable, Edge, Instance, QueueLayout, SpineOrder, format_edge
from ..models.result import BranchStats
from .parallel import first_success

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Placement:
    """Gap of every new vertex plus the order inside each occupied gap"""

    gap_of: Mapping[str, int]
    within_gap: Mapping[int, tuple[str, ...]]

    def to_spine(self, h_spine: SpineOrder) -> SpineOrder:
        """Spine of G obtained by inserting the new vertices into the spine of H"""
        order: list[str] = []
        for gap in range(len(h_spine) + 1):
            order.extend(self.within_gap.get(gap, ()))
            if gap < len(h_spine):
                order.append(h_spine.order[gap])
        return SpineOrder(tuple(order))

    @classmethod
    def from_spine(cls, spine: SpineOrder, h_spine: SpineOrder) -> "Placement":
        """
        Recover the placement a spine of G makes of the vertices outside H.

        Raises:
            PreconditionError: spine does not extend h_spine
        """
        if not spine.respects(h_spine):
            raise PreconditionError("Spine does not extend the spine order of H")
        gap_of: dict[str, int] = {}
        within: dict[int, list[str]] = {}
        passed = 0
        for vertex in spine.order:
            if vertex in h_spine:
                passed += 1
            else:
                gap_of[vertex] = passed
                within.setdefault(passed, []).append(vertex)
        return cls(gap_of=gap_of, within_gap={gap: tuple(vs) for gap, vs in within.items()})


def enumerate_placements(inst: Instance) -> Iterator[Placement]:
    """
    Yield every placement of the new vertices, without duplicates.

    Ordered lexicographically by gap vector (new vertices in the vertex
    order of G), then by the orders inside the occupied gaps.
    """
    new = inst.v_add
    slots = len(inst.layout_h.spine) + 1
    for gaps in product(range(slots), repeat=len(new)):
        groups: dict[int, list[str]] = {}
        for vertex, gap in zip(new, gaps):
            groups.setdefault(gap, []).append(vertex)
        occupied = sorted(groups)
        for orders in product(*(permutations(groups[gap]) for gap in occupied)):
            yield Placement(gap_of=dict(zip(new, gaps)), within_gap=dict(zip(occupied, orders)))


def placement_count(inst: Instance) -> int:
    """Number of placements enumerate_placements yields"""
    count = 1
    for i in range(1, inst.n_add + 1):
        count *= len(inst.layout_h.spine) + i
    return count


def prune_flexible_edges(
    inst: Instance,
    spine: SpineOrder,
    mode: Optional[PruneMode] = None,
    table: Optional[AdmissiblePageTable] = None,
) -> tuple[tuple[Edge, ...], tuple[Edge, ...]]:
    """
    Remove new edges with at least as many admissible pages as new edges.

    Args:
        inst: Extension instance
        spine: Spine of all of V(G)
        mode: ORIGINAL keeps the threshold at the initial edge count,
            ITERATIVE recomputes it from the remaining edges until fixpoint
        table: Precomputed admissible pages for this spine

    Returns:
        (remaining edges, removed edges in removal order)
    """
    mode = mode or default_config.prune_mode
    table = table or admissible_pages(inst, spine)
    remaining = list(inst.e_add)

    if mode is PruneMode.ORIGINAL:
        threshold = len(remaining)
        removed = [e for e in remaining if len(table.admissible[e]) >= threshold]
        kept = [e for e in remaining if len(table.admissible[e]) < threshold]
        return tuple(kept), tuple(removed)

    removed = []
    while remaining:
        threshold = len(remaining)
        flexible = next((e for e in remaining if len(table.admissible[e]) >= threshold), None)
        if flexible is None:
            break
        remaining.remove(flexible)
        removed.append(flexible)
    return tuple(remaining), tuple(removed)


def _assign_exhaustive(
    edges: tuple[Edge, ...], table: AdmissiblePageTable
) -> Optional[dict[Edge, int]]:
    """Try every admissible page combination; first in lexicographic page order"""
    if not edges:
        return {}
    chosen: dict[Edge, int] = {}
    # One page iterator per edge on the current path
    candidates = [iter(sorted(table.admissible[edges[0]]))]
    while candidates:
        index = len(candidates) - 1
        edge = edges[index]
        chosen.pop(edge, None)
        page = next(
            (p for p in candidates[-1] if all(chosen.get(other) != p for other in table.conflicts[edge])),
            None,
        )
        if page is None:
            candidates.pop()
            continue
        chosen[edge] = page
        if index + 1 == len(edges):
            return chosen
        candidates.append(iter(sorted(table.admissible[edges[index + 1]])))
    return None


def solve_edges_only(
    inst: Instance,
    spine: SpineOrder,
    mode: Optional[PruneMode] = None,
) -> Optional[QueueLayout]:
    """
    Assign the new edges to pages under a fixed spine of all of V(G).

    Flexible edges are pruned, the rest is searched exhaustively, and the
    pruned edges are put back in reverse removal order on the lowest page
    free of conflicting new edges.

    Returns:
        A layout of G extending the layout of H, or None if none exists
        under this spine
    """
    check_spine(inst, spine)
    if not inst.e_add:
        return QueueLayout(spine, inst.layout_h.assignment)

    table = admissible_pages(inst, spine)
    kept, removed = prune_flexible_edges(inst, spine, mode, table)
    assignment = _assign_exhaustive(kept, table)
    if assignment is None:
        return None

    for edge in reversed(removed):
        busy = {assignment[other] for other in table.conflicts[edge] if other in assignment}
        free = sorted(table.admissible[edge] - busy)
        if not free:
            raise ConsistencyError(f"No free page to put back pruned edge {format_edge(edge)}")
        assignment[edge] = free[0]

    return QueueLayout(spine, inst.layout_h.assignment.extended(
        {edge: assignment[edge] for edge in inst.e_add}
    ))


def _placement_branch(inst: Instance, mode: PruneMode, placement: Placement) -> Optional[QueueLayout]:
    return solve_edges_only(inst, placement.to_spine(inst.layout_h.spine), mode)


def solve_xp(
    inst: Instance, config: Optional[SolverConfig] = None
) -> Optional[tuple[QueueLayout, BranchStats]]:
    """
    Solve by enumerating placements of the new vertices.

    Every placement fixes the spine; the first placement in enumeration
    order admitting an edge assignment wins.

    Returns:
        (layout, branch statistics), or None if the instance is unsolvable
    """
    layout, stats = run_xp(inst, config)
    return None if layout is None else (layout, stats)


def run_xp(
    inst: Instance, config: Optional[SolverConfig] = None
) -> tuple[Optional[QueueLayout], BranchStats]:
    """solve_xp keeping the statistics of unsuccessful runs"""
    config = config or default_config
    stats = BranchStats()
    logger.info(
        f"XP search over {placement_count(inst)} placements "
        f"(n_add={inst.n_add}, m_add={inst.m_add}, ell={inst.ell})"
    )
    layout = first_success(
        enumerate_placements(inst),
        partial(_placement_branch, inst, config.prune_mode),
        stats,
        jobs=config.jobs,
        chunk_size=config.chunk_size,
    )
    logger.info(f"XP search done: explored={stats.branches_explored}, solved={layout is not None}")
    return layout, stats
