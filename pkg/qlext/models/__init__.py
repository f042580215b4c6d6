"""Models module"""
from .layout import (
    AdmissiblePageTable,
    Edge,
    Graph,
    Instance,
    PageAssignment,
    QueueLayout,
    SpineOrder,
    ValidationReport,
)
from .result import Algorithm, BranchStats, SolveResult, SolveStatus
from .files import InstanceFile, SolutionFile

__all__ = [
    "AdmissiblePageTable",
    "Edge",
    "Graph",
    "Instance",
    "PageAssignment",
    "QueueLayout",
    "SpineOrder",
    "ValidationReport",
    "Algorithm",
    "BranchStats",
    "SolveResult",
    "SolveStatus",
    "InstanceFile",
    "SolutionFile",
]
