"""
2-SAT Solver Service

Implication-graph 2-SAT, the encoding of an extension instance under a
fixed page assignment and endpoint order, spine decoding, and the driver
enumerating page assignments and endpoint orders.
"""
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from itertools import combinations_with_replacement, permutations, product
from math import comb, factorial
from typing import Iterator, Mapping, Optional, Union
import logging

import networkx as nx

from ..config import SolverConfig, config as default_config
from ..errors import ConsistencyError, ValidationError
from ..models.layout import (
    Edge,
    Instance,
    PageAssignment,
    PageEntry,
    QueueLayout,
    SpineOrder,
    format_edge,
    nests,
)
from ..models.result import BranchStats
from .parallel import first_success

logger = logging.getLogger(__name__)

# (variable index, polarity); polarity False is the negated variable
Literal = tuple[int, bool]
Term = Union[Literal, bool]


class ClauseKind(str, Enum):
    """Constraint a clause was emitted for"""

    ANTISYMMETRY = "antisymmetry"
    NEW_VERTEX_ORDER = "new-vertex-order"
    OLD_VERTEX_ORDER = "old-vertex-order"
    NON_NESTING = "non-nesting"


@dataclass(frozen=True)
class TwoSatFormula:
    """Conjunction of two-literal clauses"""

    variable_count: int
    clauses: tuple[tuple[Literal, Literal], ...] = ()
    # Parallel to clauses
    kinds: tuple[ClauseKind, ...] = field(default=(), compare=False)

    def __post_init__(self):
        for clause in self.clauses:
            for var, _ in clause:
                if not 0 <= var < self.variable_count:
                    raise ValidationError(f"Clause references variable {var} of {self.variable_count}")

    def satisfied_by(self, assignment: Mapping[int, bool]) -> bool:
        return all(
            any(assignment[var] == polarity for var, polarity in clause) for clause in self.clauses
        )


@dataclass(frozen=True)
class OrderVariableMap:
    """
    Variables of the encoding.

    var_of[(new, old)] is true iff the new vertex precedes the old one.
    """

    var_of: Mapping[tuple[str, str], int]

    def __len__(self) -> int:
        return len(self.var_of)


@dataclass(frozen=True)
class EndpointOrder:
    """Total order of the new vertices and the old endpoints of new edges"""

    order: tuple[str, ...]
    rank: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(self.order))
        rank = {v: i for i, v in enumerate(self.order)}
        if len(rank) != len(self.order):
            raise ValidationError("Endpoint order lists a vertex twice")
        object.__setattr__(self, "rank", rank)


def solve_2sat(f: TwoSatFormula) -> Optional[dict[int, bool]]:
    """
    Decide a 2-SAT formula.

    Builds the implication graph, condenses its strongly connected
    components and values every variable true iff its positive literal
    comes later in topological order than its negation.

    Returns:
        Satisfying assignment, or None if unsatisfiable
    """
    graph = nx.DiGraph()
    for var in range(f.variable_count):
        graph.add_node((var, True))
        graph.add_node((var, False))
    for (a, pa), (b, pb) in f.clauses:
        graph.add_edge((a, not pa), (b, pb))
        graph.add_edge((b, not pb), (a, pa))

    condensed = nx.condensation(graph)
    component = condensed.graph["mapping"]
    position = {c: i for i, c in enumerate(nx.topological_sort(condensed))}

    assignment = {}
    for var in range(f.variable_count):
        positive, negative = component[(var, True)], component[(var, False)]
        if positive == negative:
            return None
        assignment[var] = position[positive] > position[negative]
    return assignment


class _ClauseBuilder:
    """Collects clauses, folding constants as they arrive"""

    def __init__(self):
        self.clauses: list[tuple[Literal, Literal]] = []
        self.kinds: list[ClauseKind] = []
        self.contradiction = False

    @staticmethod
    def negate(term: Term) -> Term:
        if isinstance(term, bool):
            return not term
        return (term[0], not term[1])

    def clause(self, a: Term, b: Term, kind: ClauseKind) -> None:
        if a is True or b is True:
            return
        if a is False and b is False:
            self.contradiction = True
            return
        if a is False:
            a = b
        elif b is False:
            b = a
        if a == self.negate(b):
            return
        self.clauses.append((a, b))
        self.kinds.append(kind)

    def implies(self, a: Term, b: Term, kind: ClauseKind) -> None:
        self.clause(self.negate(a), b, kind)

    def iff(self, a: Term, b: Term, kind: ClauseKind) -> None:
        self.implies(a, b, kind)
        self.implies(b, a, kind)


def _new_edge_entries(inst: Instance, sigma: PageAssignment) -> list[PageEntry]:
    """Entries of sigma left over once the entries of H are taken out"""
    if sigma.page_count != inst.ell:
        raise ValidationError(f"Page assignment uses {sigma.page_count} pages, instance has {inst.ell}")
    remaining = Counter(inst.layout_h.assignment.entries)
    extra = []
    for entry in sigma.entries:
        if remaining[entry] > 0:
            remaining[entry] -= 1
        else:
            extra.append(entry)
    moved = +remaining
    if moved:
        raise ValidationError(
            f"Page assignment moves old edges {[format_edge(e) for e, _ in moved]}"
        )
    covered = Counter(edge for edge, _ in extra)
    if covered != Counter(inst.e_add):
        missing = Counter(inst.e_add) - covered
        unknown = covered - Counter(inst.e_add)
        raise ValidationError(
            f"Page assignment does not match the new edges "
            f"(missing {[format_edge(e) for e in missing]}, unknown {[format_edge(e) for e in unknown]})"
        )
    return extra


def _free_endpoints(inst: Instance) -> list[str]:
    """Old endpoints of new edges that have a new endpoint, in H order"""
    old = inst.h.vertex_set
    found = set()
    for edge in inst.e_add:
        if edge[0] in old and edge[1] in old:
            continue
        found.update(v for v in edge if v in old)
    rank = inst.layout_h.spine.rank
    return sorted(found, key=rank.__getitem__)


def _check_endpoint_order(inst: Instance, eo: EndpointOrder) -> None:
    required = set(inst.v_add) | set(_free_endpoints(inst))
    missing = required - set(eo.order)
    if missing:
        raise ValidationError(f"Endpoint order misses {sorted(missing)}")
    unknown = set(eo.order) - inst.g.vertex_set
    if unknown:
        raise ValidationError(f"Endpoint order lists vertices outside G: {sorted(unknown)}")
    h_rank = inst.layout_h.spine.rank
    old = [v for v in eo.order if v in h_rank]
    if any(h_rank[a] > h_rank[b] for a, b in zip(old, old[1:])):
        raise ValidationError("Endpoint order contradicts the spine order of H")


def encode_instance(
    inst: Instance, sigma: PageAssignment, eo: EndpointOrder
) -> Optional[tuple[TwoSatFormula, OrderVariableMap]]:
    """
    Encode the remaining spine choices as a 2-SAT formula.

    New edges between old vertices are treated as old edges. Pairs whose
    order is already fixed (both old, or both in the endpoint order) are
    constants and never become variables.

    Args:
        inst: Extension instance
        sigma: Pages of all edges of G
        eo: Order of the new vertices and the old endpoints of new edges

    Returns:
        (formula, variable map), or None when sigma and eo already force a
        same-page nesting

    Raises:
        ValidationError: sigma misses a new edge or eo is not a total order
            of the required vertices
    """
    entries = _new_edge_entries(inst, sigma)
    _check_endpoint_order(inst, eo)

    h_spine = inst.layout_h.spine
    h_rank = h_spine.rank
    eo_rank = eo.rank
    new = set(inst.v_add)

    var_of: dict[tuple[str, str], int] = {}
    for u in inst.v_add:
        for w in h_spine.order:
            if w not in eo_rank:
                var_of[(u, w)] = len(var_of)

    def precedes(a: str, b: str) -> Term:
        if a in new and b in new:
            return eo_rank[a] < eo_rank[b]
        if a not in new and b not in new:
            return h_rank[a] < h_rank[b]
        if a in new:
            if b in eo_rank:
                return eo_rank[a] < eo_rank[b]
            return (var_of[(a, b)], True)
        if a in eo_rank:
            return eo_rank[a] < eo_rank[b]
        return (var_of[(b, a)], False)

    # Edges whose endpoints are all old, and edges touching a new vertex
    old_vertices = inst.h.vertex_set
    between_old = [(e, p) for e, p in entries if e[0] in old_vertices and e[1] in old_vertices]
    old_edges = list(inst.layout_h.assignment.entries) + between_old
    new_edges = [(e, p) for e, p in entries if e[0] not in old_vertices or e[1] not in old_vertices]

    for edge, page in between_old:
        for other, other_page in old_edges:
            if page == other_page and nests(h_rank, edge, other):
                logger.debug(f"{format_edge(edge)} nests {format_edge(other)} on page {page}")
                return None
    for i, (first, page) in enumerate(new_edges):
        for second, other_page in new_edges[i + 1:]:
            if page == other_page and nests(eo_rank, first, second):
                logger.debug(f"{format_edge(first)} nests {format_edge(second)} under the endpoint order")
                return None

    builder = _ClauseBuilder()
    # Antisymmetry holds by construction: one variable per unordered pair

    old_order = h_spine.order
    for u in inst.v_add:
        for left, right in zip(old_order, old_order[1:]):
            builder.implies(precedes(u, left), precedes(u, right), ClauseKind.OLD_VERTEX_ORDER)

    new_in_eo = [v for v in eo.order if v in new]
    for first, second in zip(new_in_eo, new_in_eo[1:]):
        for w in old_order:
            builder.implies(precedes(second, w), precedes(first, w), ClauseKind.NEW_VERTEX_ORDER)

    def oriented_new(edge: Edge) -> Edge:
        a, b = edge
        return (a, b) if eo_rank[a] < eo_rank[b] else (b, a)

    for old_edge, page in old_edges:
        a, b = h_spine.orient(old_edge)
        for new_edge, new_page in new_edges:
            if new_page != page or a in new_edge or b in new_edge:
                continue
            c, d = oriented_new(new_edge)
            builder.iff(precedes(a, c), precedes(b, d), ClauseKind.NON_NESTING)

    if builder.contradiction:
        return None
    formula = TwoSatFormula(len(var_of), tuple(builder.clauses), tuple(builder.kinds))
    return formula, OrderVariableMap(var_of)


def decode_spine(
    inst: Instance,
    eo: EndpointOrder,
    assignment: Mapping[int, bool],
    variables: OrderVariableMap,
) -> SpineOrder:
    """
    Build the spine of G an accepted assignment describes.

    Raises:
        ConsistencyError: The implied order has a cycle
    """
    graph = nx.DiGraph()
    graph.add_nodes_from(inst.g.vertices)
    h_order = inst.layout_h.spine.order
    nx.add_path(graph, h_order)
    nx.add_path(graph, eo.order)
    for (u, w), var in variables.var_of.items():
        if assignment[var]:
            graph.add_edge(u, w)
        else:
            graph.add_edge(w, u)

    try:
        order = list(nx.topological_sort(graph))
    except nx.NetworkXUnfeasible as e:
        raise ConsistencyError(f"Order variables describe a cycle: {e}") from e
    return SpineOrder(tuple(order))


def enumerate_endpoint_orders(inst: Instance) -> Iterator[EndpointOrder]:
    """
    Yield the endpoint orders to branch on.

    Old endpoints keep their order from H; each permutation of the new
    vertices is interleaved with them in every possible way.
    """
    fixed = _free_endpoints(inst)
    for perm in permutations(inst.v_add):
        for slots in combinations_with_replacement(range(len(fixed) + 1), len(perm)):
            order: list[str] = []
            cursor = 0
            for vertex, slot in zip(perm, slots):
                order.extend(fixed[cursor:slot])
                cursor = max(cursor, slot)
                order.append(vertex)
            order.extend(fixed[cursor:])
            yield EndpointOrder(tuple(order))


def estimated_branches(inst: Instance) -> int:
    """
    Number of branches the driver enumerates: page assignments times endpoint orders.

    The count is exact: ell^m * n! * C(|W| + n, n), with m new edges, n new
    vertices and W the old neighbors of new vertices. It is not bounded by
    ell^m * n! * m^n; one new vertex next to m old vertices already gives
    ell^m * (m + 1) branches.
    """
    interleavings = comb(len(_free_endpoints(inst)) + inst.n_add, inst.n_add)
    return inst.ell ** inst.m_add * factorial(inst.n_add) * interleavings


def _solve_branch(
    inst: Instance, sigma: PageAssignment, eo: EndpointOrder
) -> Optional[QueueLayout]:
    encoded = encode_instance(inst, sigma, eo)
    if encoded is None:
        return None
    formula, variables = encoded
    assignment = solve_2sat(formula)
    if assignment is None:
        return None
    return QueueLayout(decode_spine(inst, eo, assignment, variables), sigma)


def _kappa_branch(
    inst: Instance, branch: tuple[tuple[int, ...], EndpointOrder]
) -> Optional[QueueLayout]:
    pages, eo = branch
    sigma = inst.layout_h.assignment.extended(dict(zip(inst.e_add, pages)))
    return _solve_branch(inst, sigma, eo)


def _kappa_branches(inst: Instance) -> Iterator[tuple[tuple[int, ...], EndpointOrder]]:
    orders = list(enumerate_endpoint_orders(inst))
    for pages in product(range(1, inst.ell + 1), repeat=inst.m_add):
        for eo in orders:
            yield pages, eo


def solve_fpt_kappa_ell(
    inst: Instance, config: Optional[SolverConfig] = None
) -> Optional[tuple[QueueLayout, BranchStats]]:
    """
    Solve by branching on page assignments and endpoint orders.

    Page assignments of the new edges run in counter order over the edge
    order of G, endpoint orders in enumeration order; each branch is
    decided by 2-SAT.

    Returns:
        (layout, branch statistics), or None if the instance is unsolvable
    """
    layout, stats = run_fpt_kappa_ell(inst, config)
    return None if layout is None else (layout, stats)


def run_fpt_kappa_ell(
    inst: Instance, config: Optional[SolverConfig] = None
) -> tuple[Optional[QueueLayout], BranchStats]:
    """solve_fpt_kappa_ell keeping the statistics of unsuccessful runs"""
    config = config or default_config
    stats = BranchStats()
    logger.info(
        f"2-SAT branching (n_add={inst.n_add}, m_add={inst.m_add}, ell={inst.ell}), "
        f"estimated {estimated_branches(inst)} branches"
    )
    layout = first_success(
        _kappa_branches(inst),
        partial(_kappa_branch, inst),
        stats,
        jobs=config.jobs,
        chunk_size=config.chunk_size,
    )
    logger.info(f"2-SAT branching done: explored={stats.branches_explored}, solved={layout is not None}")
    return layout, stats
