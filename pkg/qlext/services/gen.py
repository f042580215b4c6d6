"""
Instance Generators

Multicolored-clique reduction (with or without parallel edges in H), its
bookkeeping and property checks, clique tooling, and random partial
layouts for fuzzing.
"""
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from itertools import combinations
from typing import Any, Iterable, Iterator, Mapping, Optional, Union
import logging
import random

import networkx as nx

from ..core import sees
from ..errors import GenerationError, PreconditionError, ValidationError
from ..models.layout import (
    Edge,
    Graph,
    Instance,
    PageAssignment,
    QueueLayout,
    SpineOrder,
    edge_key,
    format_edge,
)
from .fixed_order import fixed_order_min_pages
from .solver_service import SolverService

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MccInstance:
    """Multicolored clique input: a graph with its vertices split into k independent classes"""

    graph: Graph
    k: int
    coloring: Mapping[str, int]

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError(f"Color count must be at least 1, got {self.k}")
        if self.graph.multi:
            raise ValidationError("Clique graph must be simple")
        for vertex in self.graph.vertices:
            color = self.coloring.get(vertex)
            if color is None:
                raise ValidationError(f"Vertex {vertex!r} has no color")
            if not 1 <= color <= self.k:
                raise ValidationError(f"Color {color} of {vertex!r} is outside [1..{self.k}]")
        unknown = set(self.coloring) - self.graph.vertex_set
        if unknown:
            raise ValidationError(f"Coloring lists vertices outside the graph: {sorted(unknown)}")
        empty = [c for c in range(1, self.k + 1) if c not in set(self.coloring.values())]
        if empty:
            raise ValidationError(f"Color classes {empty} are empty")
        for u, v in self.graph.edges:
            if self.coloring[u] == self.coloring[v]:
                raise ValidationError(
                    f"Color class {self.coloring[u]} is not independent: {format_edge((u, v))}"
                )

    @cached_property
    def classes(self) -> dict[int, tuple[str, ...]]:
        """Members of every color class in vertex order"""
        return {
            color: tuple(v for v in self.graph.vertices if self.coloring[v] == color)
            for color in range(1, self.k + 1)
        }


class ReductionProperty(str, Enum):
    """Checks verify_reduction_properties runs on a solved reduction instance"""

    # New vertex inside the block of its own color
    INTERVAL_PLACEMENT = "interval-placement"
    # Fixation edges, and only those, on the dummy page
    FIXATION_PAGES = "fixation-pages"
    # Clique edge on the page of a clique-graph edge joining the same colors
    EDGE_COLORS = "edge-colors"
    # Clique edge endpoints inside the intervals of that edge's endpoints
    EDGE_GADGET = "edge-gadget"
    # Bottom vertices hidden on edge pages outside their color block
    HIDDEN_BOTTOMS = "hidden-bottoms"


@dataclass(frozen=True)
class ReductionReport:
    violations: tuple[tuple[ReductionProperty, str], ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def failed(self) -> frozenset[ReductionProperty]:
        return frozenset(prop for prop, _ in self.violations)


def _copy(color: int, index: int) -> str:
    return f"u{color}.{index}"


def _bottom(color: int) -> str:
    return f"u{color}.bot"


def _bottom_left(color: int, page: int, simple: bool) -> str:
    return f"u{color}.botL.e{page}" if simple else f"u{color}.botL"


def _bottom_right(color: int, page: int, simple: bool) -> str:
    return f"u{color}.botR.e{page}" if simple else f"u{color}.botR"


def _new_vertex(color: int) -> str:
    return f"x{color}"


@dataclass(frozen=True)
class ReductionArtifacts:
    """Reduction output with the bookkeeping needed to read solutions back"""

    instance: Instance
    mcc: MccInstance
    # Original vertex -> (left, right) copies bounding its interval
    interval_of: Mapping[str, tuple[str, str]]
    # Clique-graph edge -> its page
    page_of_edge: Mapping[Edge, int]
    dummy_page: int
    new_vertices: tuple[str, ...]
    # True for the form with parallel edges in H
    allow_multi: bool

    @property
    def k(self) -> int:
        return self.mcc.k

    @property
    def color_of_new(self) -> dict[str, int]:
        return {vertex: color for color, vertex in enumerate(self.new_vertices, start=1)}

    @property
    def class_sizes(self) -> dict[int, int]:
        return {color: len(members) for color, members in self.mcc.classes.items()}

    @property
    def edge_by_page(self) -> dict[int, Edge]:
        return {page: edge for edge, page in self.page_of_edge.items()}

    def to_meta(self) -> dict[str, Any]:
        """Bookkeeping block stored with the instance file"""
        return {
            "generator": "mcc",
            "k": self.k,
            "simple": not self.allow_multi,
            "dummy_page": self.dummy_page,
            "class_sizes": {str(c): n for c, n in self.class_sizes.items()},
            "color_of_new": self.color_of_new,
            "page_of_edge": {format_edge(e): p for e, p in self.page_of_edge.items()},
            "interval_of": {v: list(bounds) for v, bounds in self.interval_of.items()},
        }


def _oriented(mcc: MccInstance, edge: Edge) -> Edge:
    """Clique-graph edge with the endpoint of the smaller color first"""
    u, v = edge
    return (u, v) if mcc.coloring[u] < mcc.coloring[v] else (v, u)


def _reject_shared_twists(entries: Iterable[tuple[Edge, int]], gc_edges: list[Edge]) -> None:
    """
    Raise when two edge gadgets put the same H edge on their pages.

    Only twists can collide once the bottom vertices are per page: the
    clique-graph edges at positions (i, j) and (i + 1, j + 1) of one color
    pair share the twist edge between copies i + 1 and j + 1.
    """
    first_page: dict[Edge, int] = {}
    for edge, page in entries:
        key = edge_key(*edge)
        if key not in first_page:
            first_page[key] = page
            continue
        raise GenerationError(
            f"Clique-graph edges {format_edge(gc_edges[first_page[key] - 1])} and "
            f"{format_edge(gc_edges[page - 1])} share the twist edge {format_edge(key)}; "
            "the input has no reduction without parallel edges"
        )


def reduce_mcc(mcc: MccInstance, simple: bool = False) -> ReductionArtifacts:
    """
    Build the extension instance of a multicolored clique input.

    Args:
        mcc: Clique input with k colors
        simple: Give every clique-graph edge its own copies of the outer
            bottom vertices so that H has no parallel edges

    Returns:
        ReductionArtifacts around an instance with M + 1 pages, M the
        number of clique-graph edges; the dummy page is the last one

    Raises:
        GenerationError: simple is set but two clique-graph edges of one
            color pair sit at positions (i, j) and (i + 1, j + 1)
    """
    k = mcc.k
    classes = mcc.classes
    size = {color: len(members) for color, members in classes.items()}
    position = {v: i for members in classes.values() for i, v in enumerate(members, start=1)}
    color = mcc.coloring

    gc_edges = sorted(mcc.graph.edges)
    m = len(gc_edges)
    dummy_page = m + 1
    sides = range(1, m + 1) if simple else range(1, 2)

    spine: list[str] = []
    for c in range(1, k + 2):
        spine.extend(_bottom_left(c, t, simple) for t in sides)
        spine.append(_bottom(c))
        spine.extend(_bottom_right(c, t, simple) for t in sides)
        if c <= k:
            spine.extend(_copy(c, i) for i in range(1, size[c] + 2))

    entries: list[tuple[Edge, int]] = []
    page_of_edge: dict[Edge, int] = {}
    for page, edge in enumerate(gc_edges, start=1):
        p, q = _oriented(mcc, edge)
        a, b = color[p], color[q]
        i, j = position[p], position[q]
        page_of_edge[edge] = page

        def left(c: int) -> str:
            return _bottom_left(c, page, simple)

        def right(c: int) -> str:
            return _bottom_right(c, page, simple)

        gadget = [
            (left(1), _copy(a, 1)),
            (right(a), _copy(a, 1)),
            (_copy(b, size[b] + 1), left(b + 1)),
            (_copy(b, size[b] + 1), right(k + 1)),
            # twist
            (_copy(a, i), _copy(b, j)),
            (_copy(a, i + 1), _copy(b, j + 1)),
            # whiskers
            (right(a), _copy(a, i + 1)),
            (_copy(a, i), left(a + 1)),
            (right(b), _copy(b, j + 1)),
            (_copy(b, j), left(b + 1)),
            # guards
            (left(1), _bottom(1)),
            (_bottom(k + 1), right(k + 1)),
        ]
        entries.extend((e, page) for e in gadget)

    for c in range(1, k + 1):
        entries.append(((_bottom(c), _copy(c, 1)), dummy_page))
        entries.append(((_copy(c, 1), _copy(c, size[c] + 1)), dummy_page))
        entries.append(((_copy(c, size[c] + 1), _bottom(c + 1)), dummy_page))

    h_edges = tuple(edge_key(*e) for e, _ in entries)
    if simple:
        _reject_shared_twists(entries, gc_edges)
    multi = any(count > 1 for count in Counter(h_edges).values())

    new_vertices = tuple(_new_vertex(c) for c in range(1, k + 1))
    new_edges = []
    for c in range(1, k + 1):
        new_edges.append((new_vertices[c - 1], _bottom(c)))
        new_edges.append((new_vertices[c - 1], _bottom(c + 1)))
    new_edges.extend(combinations(new_vertices, 2))

    h = Graph(vertices=tuple(spine), edges=h_edges, multi=multi)
    g = Graph(vertices=tuple(spine) + new_vertices, edges=h_edges + tuple(new_edges), multi=multi)
    layout_h = QueueLayout(SpineOrder(tuple(spine)), PageAssignment(tuple(entries), dummy_page))

    interval_of = {
        v: (_copy(color[v], position[v]), _copy(color[v], position[v] + 1)) for v in mcc.graph.vertices
    }
    meta: dict[str, Any] = {}
    art = ReductionArtifacts(
        instance=Instance(ell=dummy_page, g=g, h=h, layout_h=layout_h, meta=meta),
        mcc=mcc,
        interval_of=interval_of,
        page_of_edge=page_of_edge,
        dummy_page=dummy_page,
        new_vertices=new_vertices,
        allow_multi=not simple,
    )
    meta.update(art.to_meta())
    logger.info(
        f"Reduced clique input (k={k}, N={len(mcc.graph.vertices)}, M={m}, simple={simple}): "
        f"|V(H)|={len(h.vertices)}, |E(H)|={len(h.edges)}, ell={dummy_page}, kappa={art.instance.kappa}"
    )
    return art


def colorful_cliques(mcc: MccInstance) -> Iterator[tuple[str, ...]]:
    """Yield every colorful k-clique, one vertex per color in color order"""
    graph = mcc.graph.to_networkx()

    chosen: list[str] = []

    def extend(color: int) -> Iterator[tuple[str, ...]]:
        if color > mcc.k:
            yield tuple(chosen)
            return
        for vertex in mcc.classes[color]:
            if all(graph.has_edge(vertex, other) for other in chosen):
                chosen.append(vertex)
                yield from extend(color + 1)
                chosen.pop()

    yield from extend(1)


def clique_solution(art: ReductionArtifacts, clique: Iterable[str]) -> QueueLayout:
    """
    Layout extending H that a colorful clique induces.

    Each new vertex sits right after the left copy of its clique vertex;
    fixation edges go on the dummy page and each clique edge on the page
    of the clique-graph edge between its endpoints.

    Raises:
        ValidationError: clique is not a colorful k-clique of the input
    """
    mcc = art.mcc
    members = list(clique)
    colors = sorted(mcc.coloring.get(v, 0) for v in members)
    if colors != list(range(1, art.k + 1)):
        raise ValidationError(f"Not one vertex per color: {members}")
    pick = {mcc.coloring[v]: v for v in members}
    for u, v in combinations(members, 2):
        if not mcc.graph.has_edge(u, v):
            raise ValidationError(f"{u!r} and {v!r} are not adjacent")

    after = {art.interval_of[pick[c]][0]: art.new_vertices[c - 1] for c in pick}
    order: list[str] = []
    for vertex in art.instance.layout_h.spine.order:
        order.append(vertex)
        if vertex in after:
            order.append(after[vertex])

    pages: dict[Edge, int] = {}
    for c in range(1, art.k + 1):
        x = art.new_vertices[c - 1]
        pages[edge_key(x, _bottom(c))] = art.dummy_page
        pages[edge_key(x, _bottom(c + 1))] = art.dummy_page
    for a, b in combinations(range(1, art.k + 1), 2):
        pages[edge_key(art.new_vertices[a - 1], art.new_vertices[b - 1])] = art.page_of_edge[
            edge_key(pick[a], pick[b])
        ]
    inst = art.instance
    return QueueLayout(
        SpineOrder(tuple(order)),
        inst.layout_h.assignment.extended({e: pages[e] for e in inst.e_add}),
    )


def _hidden_bottom_violations(art: ReductionArtifacts) -> list[str]:
    """Try every gap of the regions where bottom vertices must stay hidden"""
    inst = art.instance
    h_order = inst.layout_h.spine.order
    rank = inst.layout_h.spine.rank
    simple = not art.allow_multi
    lookout = "lookout"
    while lookout in inst.g.vertex_set:
        lookout += "'"
    graph = Graph(vertices=inst.h.vertices + (lookout,), edges=inst.h.edges, multi=inst.h.multi)

    problems = []
    for page in sorted(art.edge_by_page):
        for c in range(1, art.k + 1):
            last_copy = _copy(c, art.class_sizes[c] + 1)
            regions = [
                (_bottom_left(1, page, simple), _bottom_left(c, page, simple)),
                (last_copy, _bottom_right(art.k + 1, page, simple)),
            ]
            for low, high in regions:
                for gap in range(rank[low] + 1, rank[high] + 1):
                    spine = SpineOrder(h_order[:gap] + (lookout,) + h_order[gap:])
                    layout = QueueLayout(spine, inst.layout_h.assignment)
                    if sees(graph, layout, lookout, _bottom(c), page):
                        problems.append(
                            f"{_bottom(c)} visible on page {page} from gap {gap} between {low} and {high}"
                        )
    return problems


def verify_reduction_properties(
    art: ReductionArtifacts, layout: Optional[QueueLayout] = None
) -> ReductionReport:
    """
    Check a solution of a reduction instance against the gadget properties.

    Args:
        art: Reduction artifacts
        layout: Solution to check (default: solved with the auto dispatcher)

    Returns:
        ReductionReport listing every violated property

    Raises:
        PreconditionError: No layout was given and the instance is unsolvable
    """
    if layout is None:
        result = SolverService().solve(art.instance)
        if result.layout is None:
            raise PreconditionError("Reduction instance has no solution to check")
        layout = result.layout

    mcc = art.mcc
    rank = layout.spine.rank
    violations: list[tuple[ReductionProperty, str]] = []
    chosen: dict[int, str] = {}

    for c in range(1, art.k + 1):
        x = art.new_vertices[c - 1]
        for v in mcc.classes[c]:
            low, high = art.interval_of[v]
            if rank[low] < rank[x] < rank[high]:
                chosen[c] = v
                break
        else:
            violations.append(
                (ReductionProperty.INTERVAL_PLACEMENT, f"{x} is outside the block of color {c}")
            )

    fixation = set()
    for c in range(1, art.k + 1):
        x = art.new_vertices[c - 1]
        for bottom in (_bottom(c), _bottom(c + 1)):
            edge = edge_key(x, bottom)
            fixation.add(edge)
            page = layout.page_of(edge)
            if page != art.dummy_page:
                violations.append(
                    (ReductionProperty.FIXATION_PAGES, f"{format_edge(edge)} is on page {page}")
                )

    edge_by_page = art.edge_by_page
    for a, b in combinations(range(1, art.k + 1), 2):
        edge = edge_key(art.new_vertices[a - 1], art.new_vertices[b - 1])
        page = layout.page_of(edge)
        if page == art.dummy_page:
            violations.append(
                (ReductionProperty.FIXATION_PAGES, f"{format_edge(edge)} is on the dummy page")
            )
            continue
        p, q = _oriented(mcc, edge_by_page[page])
        if (mcc.coloring[p], mcc.coloring[q]) != (a, b):
            violations.append(
                (
                    ReductionProperty.EDGE_COLORS,
                    f"{format_edge(edge)} is on page {page} of {format_edge((p, q))}",
                )
            )
            continue
        if a in chosen and b in chosen and (chosen[a], chosen[b]) != (p, q):
            violations.append(
                (
                    ReductionProperty.EDGE_GADGET,
                    f"{format_edge(edge)} on page {page} but endpoints sit at {chosen[a]}, {chosen[b]}",
                )
            )

    violations.extend(
        (ReductionProperty.HIDDEN_BOTTOMS, problem) for problem in _hidden_bottom_violations(art)
    )
    if violations:
        logger.warning(f"Reduction check found {len(violations)} violations")
    return ReductionReport(tuple(violations))


def random_mcc(
    k: int, class_size: int, edge_probability: float, seed: int = 0
) -> MccInstance:
    """
    Random k-partite clique input.

    Vertices v{color}_{index}; every pair of differently colored vertices
    is joined with the given probability.
    """
    if not 0.0 <= edge_probability <= 1.0:
        raise ValidationError(f"Edge probability {edge_probability} is outside [0, 1]")
    if class_size < 1:
        raise ValidationError(f"Class size must be at least 1, got {class_size}")
    rng = random.Random(seed)
    coloring = {f"v{c}_{i}": c for c in range(1, k + 1) for i in range(1, class_size + 1)}
    vertices = tuple(coloring)
    edges = tuple(
        (u, v)
        for u, v in combinations(vertices, 2)
        if coloring[u] != coloring[v] and rng.random() < edge_probability
    )
    return MccInstance(graph=Graph(vertices, edges), k=k, coloring=coloring)


@dataclass(frozen=True)
class DeletionPolicy:
    """How much of G is stripped to form H"""

    vertices: int = 1
    # Clamped to the edges left after vertex deletion
    edges: int = 1

    def __post_init__(self):
        if self.vertices < 0 or self.edges < 0:
            raise ValidationError("Deletion counts must be non-negative")


@dataclass(frozen=True)
class RandomGenConfig:
    vertex_count: int = 6
    edge_probability: float = 0.4
    page_count: int = 2
    deletion_policy: DeletionPolicy = field(default_factory=DeletionPolicy)
    seed: int = 0
    # Lay H out again on its own random spine; solvability becomes unknown
    independent_h_layout: bool = False
    max_attempts: int = 50

    def __post_init__(self):
        if self.vertex_count < 0:
            raise ValidationError(f"Vertex count must be non-negative, got {self.vertex_count}")
        if not 0.0 <= self.edge_probability <= 1.0:
            raise ValidationError(f"Edge probability {self.edge_probability} is outside [0, 1]")
        if self.page_count < 0:
            raise ValidationError(f"Page count must be non-negative, got {self.page_count}")
        if self.deletion_policy.vertices > self.vertex_count:
            raise ValidationError(
                f"Cannot delete {self.deletion_policy.vertices} of {self.vertex_count} vertices"
            )
        if self.max_attempts < 1:
            raise ValidationError("At least one generation attempt is needed")


def _random_spine(vertices: Iterable[str], rng: random.Random) -> SpineOrder:
    order = list(vertices)
    rng.shuffle(order)
    return SpineOrder(tuple(order))


def gen_random(cfg: Union[RandomGenConfig, None] = None) -> Instance:
    """
    Random extension instance from a random graph and a random spine.

    G is sampled until its minimum page count on a random spine fits into
    cfg.page_count; that layout is cut down to H per the deletion policy.

    Raises:
        GenerationError: No sample fits into the page count
    """
    cfg = cfg or RandomGenConfig()
    rng = random.Random(cfg.seed)
    names = tuple(f"v{i}" for i in range(cfg.vertex_count))

    for attempt in range(1, cfg.max_attempts + 1):
        sampled = nx.gnp_random_graph(cfg.vertex_count, cfg.edge_probability, seed=rng.randrange(2**32))
        g = Graph(names, tuple((names[a], names[b]) for a, b in sorted(sampled.edges())))
        spine = _random_spine(names, rng)
        needed, witness = fixed_order_min_pages(g, spine)
        if needed <= cfg.page_count:
            break
        logger.debug(f"Attempt {attempt}: sample needs {needed} pages, {cfg.page_count} available")
    else:
        raise GenerationError(
            f"No sample fits into {cfg.page_count} pages after {cfg.max_attempts} attempts"
        )

    removed = set(rng.sample(names, cfg.deletion_policy.vertices))
    surviving = [e for e in g.edges if e[0] not in removed and e[1] not in removed]
    dropped = set(rng.sample(surviving, min(cfg.deletion_policy.edges, len(surviving))))
    h_vertices = tuple(v for v in spine.order if v not in removed)
    h_edges = tuple(e for e in surviving if e not in dropped)
    h = Graph(h_vertices, h_edges)

    pages = witness.assignment.pages
    layout_h = QueueLayout(
        spine.restricted(h_vertices),
        PageAssignment(tuple((e, pages[e]) for e in h_edges), cfg.page_count),
    )
    known_solvable: Optional[bool] = True

    if cfg.independent_h_layout:
        for _ in range(cfg.max_attempts):
            needed, fresh = fixed_order_min_pages(h, _random_spine(h_vertices, rng))
            if needed <= cfg.page_count:
                layout_h = QueueLayout(fresh.spine, PageAssignment(fresh.assignment.entries, cfg.page_count))
                break
        else:
            raise GenerationError(f"No spine of H fits into {cfg.page_count} pages")
        known_solvable = None

    meta = {
        "generator": "random",
        "seed": cfg.seed,
        "vertex_count": cfg.vertex_count,
        "edge_probability": cfg.edge_probability,
        "deleted_vertices": sorted(removed),
        "deleted_edges": sorted(format_edge(e) for e in dropped),
        "independent_h_layout": cfg.independent_h_layout,
    }
    return Instance(
        ell=cfg.page_count, g=g, h=h, layout_h=layout_h, known_solvable=known_solvable, meta=meta
    )
