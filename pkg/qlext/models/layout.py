"""
Queue layout domain models

Graphs, spine orders, page assignments, layouts and extension instances.
All models are immutable after construction.
"""
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Iterator, Mapping, Optional

import networkx as nx

from ..errors import PreconditionError, StructuralError, ValidationError

Edge = tuple[str, str]
PageEntry = tuple[Edge, int]


def edge_key(u: str, v: str) -> Edge:
    """Canonical form of the undirected edge uv"""
    return (u, v) if u <= v else (v, u)


def format_edge(edge: Edge) -> str:
    return f"{edge[0]}--{edge[1]}"


def nests(rank: Mapping[str, int], e1: Edge, e2: Edge) -> bool:
    """
    Nesting test on precomputed ranks.

    Callers guarantee that all four endpoints are ranked. Edges sharing an
    endpoint never nest.
    """
    a, b = rank[e1[0]], rank[e1[1]]
    if a > b:
        a, b = b, a
    c, d = rank[e2[0]], rank[e2[1]]
    if c > d:
        c, d = d, c
    return (a < c and d < b) or (c < a and b < d)


@dataclass(frozen=True)
class Graph:
    """Undirected graph over an ordered vertex set"""

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...] = ()
    # Parallel edges allowed (intermediate reduction output only)
    multi: bool = False

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(edge_key(u, v) for u, v in self.edges))

        members = set(self.vertices)
        if len(members) != len(self.vertices):
            raise ValidationError("Vertex set lists a vertex twice")

        seen: set[Edge] = set()
        for edge in self.edges:
            u, v = edge
            if u == v:
                raise ValidationError(f"Self-loop at {u!r}")
            if u not in members or v not in members:
                raise ValidationError(f"Edge {format_edge(edge)} has an endpoint outside the vertex set")
            if edge in seen and not self.multi:
                raise ValidationError(f"Duplicate edge {format_edge(edge)}")
            seen.add(edge)

    @cached_property
    def vertex_set(self) -> frozenset[str]:
        return frozenset(self.vertices)

    @cached_property
    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    @cached_property
    def edge_counts(self) -> Counter:
        return Counter(self.edges)

    @property
    def has_parallel_edges(self) -> bool:
        return len(self.edge_set) < len(self.edges)

    def has_edge(self, u: str, v: str) -> bool:
        return edge_key(u, v) in self.edge_set

    @classmethod
    def from_networkx(cls, graph: nx.Graph) -> "Graph":
        """Build from a networkx graph; node labels become strings"""
        return cls(
            vertices=tuple(str(v) for v in graph.nodes),
            edges=tuple((str(u), str(v)) for u, v in graph.edges()),
            multi=graph.is_multigraph(),
        )

    def to_networkx(self) -> nx.Graph:
        graph = nx.MultiGraph() if self.multi else nx.Graph()
        graph.add_nodes_from(self.vertices)
        graph.add_edges_from(self.edges)
        return graph


@dataclass(frozen=True)
class SpineOrder:
    """Total order of vertices along the spine"""

    order: tuple[str, ...]
    rank: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(self.order))
        rank = {v: i for i, v in enumerate(self.order)}
        if len(rank) != len(self.order):
            raise ValidationError("Spine order lists a vertex twice")
        object.__setattr__(self, "rank", rank)

    def __len__(self) -> int:
        return len(self.order)

    def __iter__(self) -> Iterator[str]:
        return iter(self.order)

    def __contains__(self, vertex: object) -> bool:
        return vertex in self.rank

    def precedes(self, u: str, v: str) -> bool:
        return self.rank[u] < self.rank[v]

    def orient(self, edge: Edge) -> Edge:
        """Endpoints of `edge` as (left, right)"""
        u, v = edge
        if u not in self.rank or v not in self.rank:
            raise PreconditionError(f"Edge {format_edge(edge)} has an endpoint off the spine")
        return (u, v) if self.rank[u] < self.rank[v] else (v, u)

    def restricted(self, vertices: Iterable[str]) -> "SpineOrder":
        keep = set(vertices)
        return SpineOrder(tuple(v for v in self.order if v in keep))

    def respects(self, other: "SpineOrder") -> bool:
        """True if every vertex of `other` is here, in the same relative order"""
        previous = -1
        for v in other.order:
            position = self.rank.get(v)
            if position is None or position < previous:
                return False
            previous = position
        return True


@dataclass(frozen=True)
class PageAssignment:
    """
    Page of every edge, pages numbered 1..page_count.

    Stored as (edge, page) entries so that parallel edges of an intermediate
    multi-graph can sit on different pages.
    """

    entries: tuple[PageEntry, ...]
    page_count: int

    def __post_init__(self):
        object.__setattr__(
            self, "entries", tuple((edge_key(*edge), int(page)) for edge, page in self.entries)
        )
        if self.page_count < 0:
            raise ValidationError(f"Page count must be non-negative, got {self.page_count}")
        for edge, page in self.entries:
            if not 1 <= page <= self.page_count:
                raise ValidationError(
                    f"Page {page} of edge {format_edge(edge)} is outside [1..{self.page_count}]"
                )

    @classmethod
    def from_mapping(cls, pages: Mapping[Edge, int], page_count: int) -> "PageAssignment":
        return cls(tuple(pages.items()), page_count)

    def __len__(self) -> int:
        return len(self.entries)

    @cached_property
    def pages(self) -> dict[Edge, int]:
        """Edge to page lookup; for parallel edges the first entry wins"""
        lookup: dict[Edge, int] = {}
        for edge, page in self.entries:
            lookup.setdefault(edge, page)
        return lookup

    @cached_property
    def by_page(self) -> dict[int, tuple[Edge, ...]]:
        grouped: dict[int, list[Edge]] = {}
        for edge, page in self.entries:
            grouped.setdefault(page, []).append(edge)
        return {page: tuple(edges) for page, edges in sorted(grouped.items())}

    @cached_property
    def edge_counts(self) -> Counter:
        return Counter(edge for edge, _ in self.entries)

    @cached_property
    def entry_counts(self) -> Counter:
        return Counter(self.entries)

    def page_of(self, edge: Edge) -> int:
        return self.pages[edge_key(*edge)]

    def extended(self, pages: Mapping[Edge, int]) -> "PageAssignment":
        """Copy with further edges appended"""
        return PageAssignment(self.entries + tuple(pages.items()), self.page_count)


@dataclass(frozen=True)
class QueueLayout:
    """Spine order plus page assignment"""

    spine: SpineOrder
    assignment: PageAssignment

    @property
    def page_count(self) -> int:
        return self.assignment.page_count

    def page_of(self, edge: Edge) -> int:
        return self.assignment.page_of(edge)


@dataclass(frozen=True)
class Instance:
    """
    Queue Layout Extension instance (ell, G, H, layout of H).

    Vertices of G missing from H and edges of G missing from H are the
    new (added) elements; everything in H is old.
    """

    ell: int
    g: Graph
    h: Graph
    layout_h: QueueLayout
    # Generator hint: True when a witness extension is known to exist
    known_solvable: Optional[bool] = None
    meta: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.ell < 0:
            raise ValidationError(f"Page count must be non-negative, got {self.ell}")
        if self.layout_h.page_count != self.ell:
            raise ValidationError(
                f"Layout of H uses {self.layout_h.page_count} pages, instance has {self.ell}"
            )

        if not self.h.vertex_set <= self.g.vertex_set:
            missing = sorted(self.h.vertex_set - self.g.vertex_set)
            raise ValidationError(f"H has vertices outside G: {missing}")
        if self.h.edge_counts - self.g.edge_counts:
            extra = sorted(self.h.edge_counts - self.g.edge_counts)
            raise ValidationError(f"H has edges outside G: {[format_edge(e) for e in extra]}")

        if set(self.layout_h.spine.order) != self.h.vertex_set or len(self.layout_h.spine) != len(
            self.h.vertices
        ):
            raise StructuralError("Spine of H does not cover exactly the vertices of H")
        if self.layout_h.assignment.edge_counts != self.h.edge_counts:
            raise StructuralError("Page assignment of H does not cover exactly the edges of H")

        # Parallel edges may only occur among the old edges
        if len(set(self.e_add)) != len(self.e_add) or not self.h.edge_set.isdisjoint(self.e_add):
            raise ValidationError("New edges must not be parallel to other edges")

        rank = self.layout_h.spine.rank
        for page, edges in self.layout_h.assignment.by_page.items():
            for i, first in enumerate(edges):
                for second in edges[i + 1:]:
                    if nests(rank, first, second):
                        raise ValidationError(
                            f"Layout of H is not a queue layout: {format_edge(first)} and "
                            f"{format_edge(second)} nest on page {page}"
                        )

    @cached_property
    def v_add(self) -> tuple[str, ...]:
        """New vertices in the vertex order of G"""
        return tuple(v for v in self.g.vertices if v not in self.h.vertex_set)

    @cached_property
    def e_add(self) -> tuple[Edge, ...]:
        """New edges in the edge order of G"""
        remaining = Counter(self.h.edges)
        added = []
        for edge in self.g.edges:
            if remaining[edge] > 0:
                remaining[edge] -= 1
            else:
                added.append(edge)
        return tuple(added)

    @cached_property
    def e_add_h(self) -> tuple[Edge, ...]:
        """New edges whose endpoints are both old"""
        old = self.h.vertex_set
        return tuple(e for e in self.e_add if e[0] in old and e[1] in old)

    @property
    def n_add(self) -> int:
        return len(self.v_add)

    @property
    def m_add(self) -> int:
        return len(self.e_add)

    @property
    def kappa(self) -> int:
        return self.n_add + self.m_add

    @property
    def allows_multi(self) -> bool:
        """True for intermediate multi-graph instances"""
        return self.g.multi or self.h.multi

    @property
    def old_pages(self) -> dict[int, tuple[Edge, ...]]:
        return self.layout_h.assignment.by_page


@dataclass(frozen=True)
class AdmissiblePageTable:
    """Admissible pages P(e) and conflicting new edges of every new edge"""

    admissible: Mapping[Edge, frozenset[int]]
    conflicts: Mapping[Edge, frozenset[Edge]]

    @property
    def edges(self) -> tuple[Edge, ...]:
        return tuple(self.admissible)

    def pages(self, edge: Edge) -> frozenset[int]:
        return self.admissible[edge]


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a layout validation"""

    violations: tuple[tuple[Edge, Edge, int], ...] = ()
    # True when enumeration stopped at the configured cap
    truncated: bool = False

    @property
    def ok(self) -> bool:
        return not self.violations

    def describe(self) -> list[str]:
        return [
            f"page {page}: {format_edge(first)} and {format_edge(second)} nest"
            for first, second, page in self.violations
        ]
