"""Services module"""
from .solver_service import SOLVERS, SolverService
from .gen import MccInstance, RandomGenConfig, ReductionArtifacts, gen_random, reduce_mcc

__all__ = [
    "SOLVERS",
    "SolverService",
    "MccInstance",
    "RandomGenConfig",
    "ReductionArtifacts",
    "gen_random",
    "reduce_mcc",
]
