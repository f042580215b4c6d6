"""
Shared builders, fixtures and hypothesis strategies
"""
import sys
from pathlib import Path
from typing import Iterable, Optional

import pytest
from hypothesis import reject, strategies as st

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from qlext.core import extends, validate_layout
from qlext.errors import GenerationError
from qlext.models.layout import Edge, Graph, Instance, PageAssignment, QueueLayout, SpineOrder
from qlext.services.gen import DeletionPolicy, RandomGenConfig, gen_random


def make_instance(
    ell: int,
    h_spine: Iterable[str],
    h_pages: Iterable[tuple[Edge, int]] = (),
    new_vertices: Iterable[str] = (),
    new_edges: Iterable[Edge] = (),
    multi: bool = False,
) -> Instance:
    """Instance from the spine of H, its (edge, page) entries and what G adds"""
    h_vertices = tuple(h_spine)
    entries = tuple(h_pages)
    h_edges = tuple(edge for edge, _ in entries)
    h = Graph(h_vertices, h_edges, multi=multi)
    g = Graph(h_vertices + tuple(new_vertices), h_edges + tuple(new_edges), multi=multi)
    layout_h = QueueLayout(SpineOrder(h_vertices), PageAssignment(entries, ell))
    return Instance(ell=ell, g=g, h=h, layout_h=layout_h)


def random_instance(
    seed: int,
    vertices: int = 6,
    edge_probability: float = 0.5,
    pages: int = 2,
    delete_vertices: int = 1,
    delete_edges: int = 1,
    independent: bool = False,
) -> Instance:
    cfg = RandomGenConfig(
        vertex_count=vertices,
        edge_probability=edge_probability,
        page_count=pages,
        deletion_policy=DeletionPolicy(vertices=delete_vertices, edges=delete_edges),
        seed=seed,
        independent_h_layout=independent,
    )
    return gen_random(cfg)


def assert_extension(inst: Instance, layout: Optional[QueueLayout]) -> None:
    """layout is a valid layout of G on ell pages extending the layout of H"""
    assert layout is not None
    assert layout.page_count == inst.ell
    report = validate_layout(inst.g, layout)
    assert report.ok, report.describe()
    assert extends(layout, inst.layout_h)


@st.composite
def instances(
    draw,
    min_vertices: int = 3,
    max_vertices: int = 6,
    max_pages: int = 2,
    new_vertices: tuple[int, int] = (0, 2),
    max_deleted_edges: int = 2,
):
    """Random extension instances, about half of them with an independently laid out H"""
    cfg = RandomGenConfig(
        vertex_count=draw(st.integers(min_vertices, max_vertices)),
        edge_probability=draw(st.sampled_from([0.3, 0.5, 0.7])),
        page_count=draw(st.integers(1, max_pages)),
        deletion_policy=DeletionPolicy(
            vertices=draw(st.integers(*new_vertices)),
            edges=draw(st.integers(0, max_deleted_edges)),
        ),
        seed=draw(st.integers(0, 2**16)),
        independent_h_layout=draw(st.booleans()),
    )
    try:
        return gen_random(cfg)
    except GenerationError:
        reject()


@pytest.fixture
def long_matching() -> Instance:
    """1200 side-by-side new edges between old vertices on one page, more than the recursion limit"""
    spine = [f"v{i}" for i in range(2400)]
    return make_instance(ell=1, h_spine=spine, new_edges=list(zip(spine[::2], spine[1::2])))


@pytest.fixture
def nested_pair() -> Instance:
    """One old edge a-d on page 1 of 2; new edge b-c nests inside it"""
    return make_instance(
        ell=2,
        h_spine=["a", "b", "c", "d"],
        h_pages=[(("a", "d"), 1)],
        new_edges=[("b", "c")],
    )


@pytest.fixture
def one_new_vertex() -> Instance:
    """Path a-b-c on page 1; new vertex x joined to a and c"""
    return make_instance(
        ell=1,
        h_spine=["a", "b", "c"],
        h_pages=[(("a", "b"), 1), (("b", "c"), 1)],
        new_vertices=["x"],
        new_edges=[("a", "x"), ("c", "x")],
    )


@pytest.fixture
def two_new_vertices() -> Instance:
    """a-d on page 1 and b-c on page 2; new u, v joined to each other and to old vertices"""
    return make_instance(
        ell=2,
        h_spine=["a", "b", "c", "d"],
        h_pages=[(("a", "d"), 1), (("b", "c"), 2)],
        new_vertices=["u", "v"],
        new_edges=[("a", "u"), ("c", "u"), ("b", "v"), ("d", "v"), ("u", "v")],
    )
