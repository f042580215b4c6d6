"""
Solver result models
"""
from dataclasses import dataclass, asdict, field
from enum import Enum
from typing import Optional

from .layout import QueueLayout


class SolveStatus(str, Enum):
    """Outcome of a solver run"""

    SOLVED = "solved"
    UNSOLVABLE = "unsolvable"
    BUDGET_EXHAUSTED = "budget_exhausted"

    @property
    def is_definitive(self) -> bool:
        return self is not SolveStatus.BUDGET_EXHAUSTED


@dataclass
class BranchStats:
    """Branch counters of an enumeration solver"""

    branches_explored: int = 0
    branches_pruned: int = 0
    solutions_found: int = 0

    def record(self, success: bool) -> None:
        self.branches_explored += 1
        if success:
            self.solutions_found += 1
        else:
            self.branches_pruned += 1

    def to_dict(self) -> dict:
        return asdict(self)


class Algorithm(str, Enum):
    """Solver selectable from the command line and the HTTP surface"""

    AUTO = "auto"
    ORACLE = "oracle"
    EDGES_FPT = "edges-fpt"
    XP = "xp"
    KAPPA_ELL_FPT = "kappa-ell-fpt"
    TWO_VERTEX = "two-vertex"
    FIXED_ORDER = "fixed-order"


@dataclass
class SolveResult:
    """Outcome of one solver run on one instance"""

    status: SolveStatus
    # Concrete algorithm that ran (never AUTO)
    algorithm: Algorithm
    layout: Optional[QueueLayout] = None
    stats: BranchStats = field(default_factory=BranchStats)
    wall_ms: float = 0.0

    @property
    def solved(self) -> bool:
        return self.status is SolveStatus.SOLVED
