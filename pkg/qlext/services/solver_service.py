"""
Solver Service

Algorithm registry, `auto` dispatch and the final verification every
returned layout goes through.
"""
from typing import Callable, Optional
import logging
import time

from ..config import SolverConfig, config as default_config
from ..core import extends, validate_layout
from ..errors import ConsistencyError, PreconditionError
from ..models.layout import Instance, QueueLayout
from ..models.result import Algorithm, BranchStats, SolveResult, SolveStatus
from .branch_solvers import run_xp, solve_edges_only
from .fixed_order import fixed_order_assign
from .oracle import OracleBudget, solve_brute_force
from .two_vertex_solver import run_two_vertices
from .twosat_solver import estimated_branches, run_fpt_kappa_ell

logger = logging.getLogger(__name__)

SolverOutcome = tuple[SolveStatus, Optional[QueueLayout], BranchStats]
Solver = Callable[[Instance, SolverConfig], SolverOutcome]


def _definitive(layout: Optional[QueueLayout], stats: BranchStats) -> SolverOutcome:
    status = SolveStatus.SOLVED if layout is not None else SolveStatus.UNSOLVABLE
    return status, layout, stats


def _require_no_new_vertices(inst: Instance, algorithm: Algorithm) -> None:
    if inst.v_add:
        raise PreconditionError(f"{algorithm.value} needs an instance without new vertices")
    if inst.allows_multi:
        raise PreconditionError(f"{algorithm.value} needs a simple graph")


def _oracle(inst: Instance, config: SolverConfig) -> SolverOutcome:
    result = solve_brute_force(inst, OracleBudget.from_config(config))
    return result.status, result.layout, result.stats


def _edges_fpt(inst: Instance, config: SolverConfig) -> SolverOutcome:
    _require_no_new_vertices(inst, Algorithm.EDGES_FPT)
    stats = BranchStats()
    layout = solve_edges_only(inst, inst.layout_h.spine, config.prune_mode)
    stats.record(layout is not None)
    return _definitive(layout, stats)


def _fixed_order(inst: Instance, config: SolverConfig) -> SolverOutcome:
    _require_no_new_vertices(inst, Algorithm.FIXED_ORDER)
    stats = BranchStats()
    layout = fixed_order_assign(inst.g, inst.layout_h.spine, inst.ell, inst.layout_h.assignment)
    if layout is not None:
        # Keep the entry order of H ahead of the new edges
        pages = layout.assignment.pages
        layout = QueueLayout(
            layout.spine, inst.layout_h.assignment.extended({e: pages[e] for e in inst.e_add})
        )
    stats.record(layout is not None)
    return _definitive(layout, stats)


def _xp(inst: Instance, config: SolverConfig) -> SolverOutcome:
    return _definitive(*run_xp(inst, config))


def _kappa_ell(inst: Instance, config: SolverConfig) -> SolverOutcome:
    return _definitive(*run_fpt_kappa_ell(inst, config))


def _two_vertex(inst: Instance, config: SolverConfig) -> SolverOutcome:
    return _definitive(*run_two_vertices(inst, config))


# Looked up at call time
SOLVERS: dict[Algorithm, Solver] = {
    Algorithm.ORACLE: _oracle,
    Algorithm.EDGES_FPT: _edges_fpt,
    Algorithm.FIXED_ORDER: _fixed_order,
    Algorithm.XP: _xp,
    Algorithm.KAPPA_ELL_FPT: _kappa_ell,
    Algorithm.TWO_VERTEX: _two_vertex,
}


class SolverService:
    """Runs a chosen or automatically picked solver and verifies its output"""

    def __init__(self, config: Optional[SolverConfig] = None):
        self.config = config or default_config

    def choose(self, inst: Instance) -> Algorithm:
        """
        Pick a solver for `auto`.

        No new vertices: fixed-order when H has no edges, edges-fpt
        otherwise (xp for multi-graphs). Two new vertices: two-vertex.
        Otherwise kappa-ell-fpt while its estimated branch count stays
        within config.auto_branch_limit, xp beyond.
        """
        if not inst.v_add:
            if inst.allows_multi:
                return Algorithm.XP
            return Algorithm.FIXED_ORDER if not inst.h.edges else Algorithm.EDGES_FPT
        if inst.n_add == 2:
            return Algorithm.TWO_VERTEX
        if estimated_branches(inst) <= self.config.auto_branch_limit:
            return Algorithm.KAPPA_ELL_FPT
        return Algorithm.XP

    def solve(self, inst: Instance, algorithm: Algorithm = Algorithm.AUTO) -> SolveResult:
        """
        Solve an instance.

        Args:
            inst: Extension instance
            algorithm: Solver to run (AUTO picks one)

        Returns:
            SolveResult with the verified layout on success

        Raises:
            PreconditionError: The instance is outside the solver's preconditions
            ConsistencyError: A solver returned a layout that fails verification
            BudgetExhaustedError: The oracle ran out of budget under the fail policy
        """
        algorithm = Algorithm(algorithm)
        if algorithm is Algorithm.AUTO:
            algorithm = self.choose(inst)
            logger.info(f"auto picked {algorithm.value}")

        started = time.perf_counter()
        status, layout, stats = SOLVERS[algorithm](inst, self.config)
        wall_ms = (time.perf_counter() - started) * 1000.0

        if layout is not None:
            self.verify(inst, layout, algorithm)
        logger.info(
            f"{algorithm.value}: {status.value} after {stats.branches_explored} branches in {wall_ms:.1f} ms"
        )
        return SolveResult(status, algorithm, layout, stats, wall_ms)

    def verify(self, inst: Instance, layout: QueueLayout, algorithm: Algorithm) -> None:
        """
        Raises:
            ConsistencyError: layout is invalid or does not extend the layout of H
        """
        report = validate_layout(inst.g, layout, limit=1)
        if not report.ok:
            raise ConsistencyError(
                f"{algorithm.value} returned an invalid layout: {'; '.join(report.describe())}"
            )
        if not extends(layout, inst.layout_h):
            raise ConsistencyError(f"{algorithm.value} returned a layout that does not extend H")
        if layout.page_count != inst.ell:
            raise ConsistencyError(f"{algorithm.value} returned a layout on {layout.page_count} pages")
