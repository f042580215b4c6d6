"""
Fixed Spine Order Service

Conflict graphs of a graph under a fixed spine, their two transitive
orientations, the inverse construction from a permutation, and optimal or
precolored page assignment when the whole spine is known.
"""
from bisect import bisect_left
from dataclasses import dataclass
from itertools import groupby
from typing import Iterator, Mapping, Optional, Sequence, Union
import logging

import networkx as nx

from ..errors import ConsistencyError, PreconditionError, ValidationError
from ..models.layout import (
    Edge,
    Graph,
    PageAssignment,
    QueueLayout,
    SpineOrder,
    edge_key,
    format_edge,
    nests,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConflictGraph:
    """Edges of a graph, adjacent when they nest under the source spine"""

    nodes: tuple[Edge, ...]
    adjacency: frozenset[frozenset[Edge]]

    def adjacent(self, a: Edge, b: Edge) -> bool:
        return frozenset((a, b)) in self.adjacency

    def neighbors(self) -> dict[Edge, set[Edge]]:
        result: dict[Edge, set[Edge]] = {node: set() for node in self.nodes}
        for pair in self.adjacency:
            a, b = tuple(pair)
            result[a].add(b)
            result[b].add(a)
        return result

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(self.nodes)
        graph.add_edges_from(tuple(pair) for pair in self.adjacency)
        return graph


@dataclass(frozen=True)
class OrientationWitness:
    """
    Transitive orientations of a conflict graph and of its complement.

    forward directs each conflict from the outer edge to the inner one;
    complement_forward directs each non-conflicting pair by start point.
    """

    forward: frozenset[tuple[Edge, Edge]]
    complement_forward: frozenset[tuple[Edge, Edge]]


@dataclass(frozen=True)
class PermutationRealization:
    """Graph whose conflict graph is the inversion graph of a permutation"""

    base_graph: Graph
    spine: SpineOrder
    # Element of the permutation each edge stands for
    element_of_edge: Mapping[Edge, int]


def _require_simple(g: Graph) -> None:
    if g.multi:
        raise PreconditionError("Fixed-order machinery needs a simple graph")


def _require_spine(g: Graph, spine: SpineOrder) -> None:
    missing = [v for v in g.vertices if v not in spine]
    if missing:
        raise PreconditionError(f"Spine misses vertices {missing}")


def _interval(rank: Mapping[str, int], edge: Edge) -> tuple[int, int]:
    a, b = rank[edge[0]], rank[edge[1]]
    return (a, b) if a < b else (b, a)


def build_conflict_graph(g: Graph, spine: SpineOrder) -> ConflictGraph:
    """
    Build the conflict graph of g under a spine.

    Args:
        g: Simple graph
        spine: Spine covering V(g)

    Returns:
        ConflictGraph with one node per edge of g
    """
    _require_simple(g)
    _require_spine(g, spine)
    rank = spine.rank

    ordered = sorted(g.edges, key=lambda e: _interval(rank, e))
    adjacency = set()
    for i, outer in enumerate(ordered):
        outer_end = _interval(rank, outer)[1]
        for inner in ordered[i + 1:]:
            if _interval(rank, inner)[0] >= outer_end:
                break
            if nests(rank, outer, inner):
                adjacency.add(frozenset((outer, inner)))
    return ConflictGraph(nodes=tuple(g.edges), adjacency=frozenset(adjacency))


def _assert_transitive(arcs: set[tuple[Edge, Edge]], name: str) -> None:
    closure = nx.transitive_closure(nx.DiGraph(list(arcs)))
    missing = next((arc for arc in closure.edges() if arc not in arcs), None)
    if missing is not None:
        a, c = missing
        raise ConsistencyError(
            f"Orientation {name} is not transitive: {format_edge(a)} reaches {format_edge(c)} "
            f"without an arc"
        )


def orient_witness(cg: ConflictGraph, spine: SpineOrder) -> OrientationWitness:
    """
    Orient a conflict graph and its complement transitively.

    Raises:
        ConsistencyError: An orientation fails the transitivity check
    """
    rank = spine.rank
    forward = set()
    complement = set()
    nodes = cg.nodes
    for i, a in enumerate(nodes):
        for b in nodes[i + 1:]:
            ia, ib = _interval(rank, a), _interval(rank, b)
            if cg.adjacent(a, b):
                # outer -> inner
                forward.add((a, b) if ia[0] < ib[0] else (b, a))
            else:
                complement.add((a, b) if ia < ib else (b, a))

    _assert_transitive(forward, "of the conflict graph")
    _assert_transitive(complement, "of the complement")
    return OrientationWitness(forward=frozenset(forward), complement_forward=frozenset(complement))


def realize_permutation(perm: Sequence[int]) -> PermutationRealization:
    """
    Build a graph and spine whose nesting pairs are the inversions of perm.

    Args:
        perm: Elements 1..n listed in permutation order

    Raises:
        ValidationError: perm is not a permutation of 1..n
    """
    n = len(perm)
    if sorted(perm) != list(range(1, n + 1)):
        raise ValidationError(f"Not a permutation of 1..{n}: {list(perm)}")

    left = [f"{v}:1" for v in range(1, n + 1)]
    right = [f"{v}:2" for v in perm]
    edges = [(f"{v}:1", f"{v}:2") for v in range(1, n + 1)]
    base = Graph(vertices=tuple(left + right), edges=tuple(edges))
    return PermutationRealization(
        base_graph=base,
        spine=SpineOrder(tuple(left + right)),
        element_of_edge={edge_key(*e): v for v, e in enumerate(edges, start=1)},
    )


def _chain_depths(g: Graph, spine: SpineOrder) -> tuple[dict[Edge, int], dict[Edge, Optional[Edge]]]:
    """
    Depth of every edge in the interval containment order.

    Edges are swept by left endpoint ascending, right endpoint descending;
    edges sharing a left endpoint never nest, so each such group reads the
    tails before any of its members is recorded.
    """
    rank = spine.rank
    ordered = sorted(g.edges, key=lambda e: (_interval(rank, e)[0], -_interval(rank, e)[1]))

    # tails[d]: smallest negated right endpoint ending a chain of depth d + 1
    tails: list[int] = []
    tail_edges: list[Edge] = []
    depth: dict[Edge, int] = {}
    parent: dict[Edge, Optional[Edge]] = {}

    for _, group in groupby(ordered, key=lambda e: _interval(rank, e)[0]):
        updates = []
        for edge in group:
            key = -_interval(rank, edge)[1]
            d = bisect_left(tails, key)
            depth[edge] = d + 1
            parent[edge] = tail_edges[d - 1] if d > 0 else None
            updates.append((d, key, edge))
        for d, key, edge in sorted(updates, key=lambda u: (u[0], u[1])):
            if d == len(tails):
                tails.append(key)
                tail_edges.append(edge)
            elif key < tails[d]:
                tails[d] = key
                tail_edges[d] = edge
    return depth, parent


def fixed_order_min_pages(g: Graph, spine: SpineOrder) -> tuple[int, QueueLayout]:
    """
    Minimum page count for a fixed spine, with a witness layout.

    Each edge goes to the page equal to its depth in the containment order.
    Callers must not rely on which optimal witness is returned.
    """
    _require_simple(g)
    _require_spine(g, spine)
    depth, _ = _chain_depths(g, spine)
    page_count = max(depth.values(), default=0)
    assignment = PageAssignment(tuple((e, depth[e]) for e in g.edges), page_count)
    return page_count, QueueLayout(spine.restricted(g.vertices), assignment)


def rainbow(g: Graph, spine: SpineOrder) -> list[Edge]:
    """Largest set of pairwise nesting edges, outermost first"""
    _require_simple(g)
    _require_spine(g, spine)
    depth, parent = _chain_depths(g, spine)
    if not depth:
        return []
    deepest = max(g.edges, key=lambda e: depth[e])
    chain = []
    current: Optional[Edge] = deepest
    while current is not None:
        chain.append(current)
        current = parent[current]
    return chain[::-1]


def _color_search(
    order: Sequence[Edge], domain: dict[Edge, int], neighbors: Mapping[Edge, set[Edge]], ell: int
) -> Optional[dict[Edge, int]]:
    """
    Depth-first page search over `order` with forward checking.

    `domain` holds a bitmask of candidate pages per edge; it is narrowed
    while an edge is colored and restored on backtrack.
    """
    if not order:
        return {}
    chosen: dict[Edge, int] = {}
    # (untried pages, neighbors narrowed by the current page) per edge on the path
    frames: list[tuple[Iterator[int], list[Edge]]] = [(iter(range(1, ell + 1)), [])]
    while frames:
        index = len(frames) - 1
        edge = order[index]
        pages, trail = frames[-1]
        if edge in chosen:
            bit = 1 << (chosen.pop(edge) - 1)
            for other in trail:
                domain[other] |= bit
            trail.clear()
        for page in pages:
            bit = 1 << (page - 1)
            if not domain[edge] & bit:
                continue
            dead = False
            for other in neighbors[edge]:
                if other in domain and other not in chosen and domain[other] & bit:
                    domain[other] &= ~bit
                    trail.append(other)
                    if not domain[other]:
                        dead = True
                        break
            if not dead:
                chosen[edge] = page
                break
            for other in trail:
                domain[other] |= bit
            trail.clear()
        else:
            frames.pop()
            continue
        if index + 1 == len(order):
            return chosen
        frames.append((iter(range(1, ell + 1)), []))
    return None


def fixed_order_assign(
    g: Graph,
    spine: SpineOrder,
    ell: int,
    precolored: Union[Mapping[Edge, int], PageAssignment, None] = None,
) -> Optional[QueueLayout]:
    """
    Extend a partial page assignment to a valid ell-page layout.

    Depth-first search over uncolored edges in descending conflict degree,
    with forward checking of the remaining candidate pages.

    Args:
        g: Simple graph
        spine: Spine covering V(g)
        ell: Page count
        precolored: Pages fixed in advance

    Returns:
        A valid layout honoring every precolored edge, or None

    Raises:
        ValidationError: A precolored edge is not in g or its page is out of range
    """
    _require_simple(g)
    _require_spine(g, spine)
    if isinstance(precolored, PageAssignment):
        precolored = precolored.pages
    fixed = {edge_key(*e): p for e, p in (precolored or {}).items()}

    for edge, page in fixed.items():
        if edge not in g.edge_set:
            raise ValidationError(f"Precolored edge {format_edge(edge)} is not in the graph")
        if not 1 <= page <= ell:
            raise ValidationError(f"Precolored page {page} of {format_edge(edge)} is outside [1..{ell}]")
    if g.edges and ell < 1:
        return None

    neighbors = build_conflict_graph(g, spine).neighbors()
    for edge, page in fixed.items():
        if any(fixed.get(other) == page for other in neighbors[edge]):
            logger.debug(f"Precoloring already nests on page {page} at {format_edge(edge)}")
            return None

    full = (1 << ell) - 1
    domain: dict[Edge, int] = {}
    for edge in g.edges:
        if edge in fixed:
            continue
        mask = full
        for other in neighbors[edge]:
            if other in fixed:
                mask &= ~(1 << (fixed[other] - 1))
        if not mask:
            return None
        domain[edge] = mask

    position = {e: i for i, e in enumerate(g.edges)}
    order = sorted(domain, key=lambda e: (-len(neighbors[e]), position[e]))
    chosen = _color_search(order, domain, neighbors, ell)
    if chosen is None:
        return None

    pages = {**fixed, **chosen}
    assignment = PageAssignment(tuple((e, pages[e]) for e in g.edges), ell)
    return QueueLayout(spine.restricted(g.vertices), assignment)
