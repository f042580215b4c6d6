"""
qlext - Configuration
"""
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Optional


class PruneMode(str, Enum):
    """Threshold used when pruning flexible new edges on a fixed spine"""

    # Fixed threshold: the number of new edges before pruning
    ORIGINAL = "original"
    # Threshold follows the number of edges still present, applied to fixpoint
    ITERATIVE = "iterative"


class ExhaustPolicy(str, Enum):
    """What the oracle does when its step budget runs out"""

    FAIL = "fail"
    REPORT_UNKNOWN = "report-unknown"


def _env_int(name: str, default: int) -> int:
    value = os.environ.get(name, "").strip()
    if not value:
        return default
    try:
        return max(1, int(value))
    except ValueError:
        return default


def _env_flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


@dataclass(frozen=True)
class SolverConfig:
    """Solver and tooling configuration"""

    # Oracle step budget (elementary branch steps)
    oracle_max_branches: int = 10**8

    # Oracle behavior once the budget is spent
    oracle_on_exhaust: ExhaustPolicy = ExhaustPolicy.REPORT_UNKNOWN

    # auto picks kappa-ell-fpt up to this many estimated branches, xp above
    auto_branch_limit: int = 10**7

    # Pruning threshold for the edges-only solver
    prune_mode: PruneMode = PruneMode.ORIGINAL

    # Worker processes for branch evaluation and bench (QLEXT_JOBS)
    jobs: int = field(default_factory=lambda: _env_int("QLEXT_JOBS", 1))

    # Branches handed to a worker per task when jobs > 1
    chunk_size: int = 64

    # Extra assertions in the two-vertex solver (QLEXT_DEBUG)
    debug_checks: bool = field(default_factory=lambda: _env_flag("QLEXT_DEBUG"))

    # Cap on violations listed by validate_layout (None lists all)
    max_violations: Optional[int] = None

    # Where the HTTP surface persists solutions (None disables persistence)
    solution_output_dir: Optional[Path] = None

    @classmethod
    def from_env(cls) -> "SolverConfig":
        """Build a configuration from QLEXT_* environment variables"""
        output_dir = os.environ.get("QLEXT_SOLUTION_DIR", "").strip()
        return cls(
            jobs=_env_int("QLEXT_JOBS", 1),
            debug_checks=_env_flag("QLEXT_DEBUG"),
            solution_output_dir=Path(output_dir) if output_dir else None,
        )

    def with_overrides(self, **changes) -> "SolverConfig":
        """Copy with the given fields replaced; None values are ignored"""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


# Default configuration instance
config = SolverConfig()
