"""
Brute-Force Oracle

Exhaustive ground truth for small instances: every placement of the new
vertices times every page assignment of the new edges, in the same order
as the placement solver, with a step budget.
"""
from dataclasses import dataclass, field
from typing import Mapping, Optional
import logging

from ..config import ExhaustPolicy, SolverConfig, config as default_config
from ..core import validate_layout
from ..errors import BudgetExhaustedError, ValidationError
from ..models.layout import Edge, Graph, Instance, PageAssignment, QueueLayout, SpineOrder, nests
from ..models.result import BranchStats, SolveStatus
from .branch_solvers import enumerate_placements
from .twosat_solver import EndpointOrder

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OracleBudget:
    """Step budget of one oracle call"""

    # Elementary steps: one per placement plus one per tentative edge page
    max_branches: int = 10**8
    on_exhaust: ExhaustPolicy = ExhaustPolicy.REPORT_UNKNOWN

    def __post_init__(self):
        if self.max_branches < 1:
            raise ValidationError(f"Oracle budget must be at least 1, got {self.max_branches}")

    @classmethod
    def from_config(cls, config: SolverConfig) -> "OracleBudget":
        return cls(max_branches=config.oracle_max_branches, on_exhaust=config.oracle_on_exhaust)


@dataclass
class OracleResult:
    """Tri-state oracle outcome"""

    status: SolveStatus
    layout: Optional[QueueLayout] = None
    steps: int = 0
    stats: BranchStats = field(default_factory=BranchStats)


class _OutOfSteps(Exception):
    pass


class _StepCounter:
    def __init__(self, limit: int):
        self.limit = limit
        self.steps = 0

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.limit:
            raise _OutOfSteps()


def _first_assignment(
    edges: tuple[Edge, ...],
    ell: int,
    rank: Mapping[str, int],
    old_pages: dict[int, tuple[Edge, ...]],
    counter: Optional[_StepCounter] = None,
) -> Optional[dict[Edge, int]]:
    """Lexicographically first page assignment of `edges` that stays valid"""
    if not edges:
        return {}
    chosen: dict[Edge, int] = {}
    on_page: dict[int, list[Edge]] = {p: list(old_pages.get(p, ())) for p in range(1, ell + 1)}
    # Remaining pages to try for each edge on the current path
    candidates = [iter(range(1, ell + 1))]
    while candidates:
        index = len(candidates) - 1
        edge = edges[index]
        if edge in chosen:
            on_page[chosen.pop(edge)].pop()
        for page in candidates[-1]:
            if counter is not None:
                counter.tick()
            if any(nests(rank, edge, other) for other in on_page[page]):
                continue
            chosen[edge] = page
            on_page[page].append(edge)
            break
        else:
            candidates.pop()
            continue
        if index + 1 == len(edges):
            return dict(chosen)
        candidates.append(iter(range(1, ell + 1)))
    return None


def solve_brute_force(inst: Instance, budget: Optional[OracleBudget] = None) -> OracleResult:
    """
    Decide an instance by exhaustive enumeration.

    Args:
        inst: Extension instance
        budget: Step budget (default: from the module configuration)

    Returns:
        OracleResult: SOLVED with the lexicographically first extension,
        UNSOLVABLE after full enumeration, or BUDGET_EXHAUSTED

    Raises:
        BudgetExhaustedError: The budget ran out under the fail policy
    """
    budget = budget or OracleBudget.from_config(default_config)
    counter = _StepCounter(budget.max_branches)
    stats = BranchStats()
    old_pages = dict(inst.old_pages)

    try:
        for placement in enumerate_placements(inst):
            counter.tick()
            spine = placement.to_spine(inst.layout_h.spine)
            pages = _first_assignment(inst.e_add, inst.ell, spine.rank, old_pages, counter)
            stats.record(pages is not None)
            if pages is not None:
                assignment = inst.layout_h.assignment.extended({e: pages[e] for e in inst.e_add})
                return OracleResult(SolveStatus.SOLVED, QueueLayout(spine, assignment), counter.steps, stats)
    except _OutOfSteps:
        logger.warning(f"Oracle budget of {budget.max_branches} steps exhausted")
        if budget.on_exhaust is ExhaustPolicy.FAIL:
            raise BudgetExhaustedError(counter.steps) from None
        return OracleResult(SolveStatus.BUDGET_EXHAUSTED, None, counter.steps, stats)

    return OracleResult(SolveStatus.UNSOLVABLE, None, counter.steps, stats)


def min_pages_brute_force(g: Graph, spine: SpineOrder) -> int:
    """Smallest page count admitting a valid assignment under a fixed spine"""
    ell = 0
    while _first_assignment(g.edges, ell, spine.rank, {}) is None:
        ell += 1
    return ell


def solve_constrained(
    inst: Instance, sigma: PageAssignment, eo: EndpointOrder
) -> Optional[QueueLayout]:
    """
    Brute-force placement under a fixed page assignment and endpoint order.

    Args:
        inst: Extension instance
        sigma: Pages of every edge of G, extending the pages of H
        eo: Order the vertices it lists must keep on the spine

    Returns:
        First valid layout in placement order, or None

    Raises:
        ValidationError: sigma does not keep the pages of H
    """
    if inst.layout_h.assignment.entry_counts - sigma.entry_counts:
        raise ValidationError("Page assignment does not keep the pages of H")
    required = SpineOrder(eo.order)
    for placement in enumerate_placements(inst):
        spine = placement.to_spine(inst.layout_h.spine)
        if not spine.respects(required):
            continue
        layout = QueueLayout(spine, sigma)
        if validate_layout(inst.g, layout, limit=1).ok:
            return layout
    return None
