"""
Instance and solution file formats

UTF-8 JSON documents. Pages are 1-based, the spine of H is the order of
`vertices_h`, and edges are written with their endpoints in canonical
order.
"""
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union
import json

from ..errors import InstanceParseError, StructuralError, ValidationError
from .layout import (
    Edge,
    Graph,
    Instance,
    PageAssignment,
    QueueLayout,
    SpineOrder,
    ValidationReport,
    edge_key,
    format_edge,
)
from .result import SolveResult


def _parse_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceParseError(f"Malformed JSON: {e}") from e


def _require(data: dict, key: str, kind: type, optional: bool = False) -> Any:
    if key not in data:
        if optional:
            return None
        raise InstanceParseError("missing", key)
    value = data[key]
    if kind is int and isinstance(value, bool) or not isinstance(value, kind):
        raise InstanceParseError(f"expected {kind.__name__}, got {type(value).__name__}", key)
    return value


def _string_list(data: dict, key: str) -> list[str]:
    values = _require(data, key, list)
    if not all(isinstance(v, str) for v in values):
        raise InstanceParseError("expected an array of strings", key)
    return values


def _edge_list(data: dict, key: str) -> list[Edge]:
    values = _require(data, key, list)
    edges = []
    for item in values:
        if not (isinstance(item, list) and len(item) == 2 and all(isinstance(v, str) for v in item)):
            raise InstanceParseError(f"expected [u, v] pairs of strings, got {item!r}", key)
        edges.append(edge_key(item[0], item[1]))
    return edges


def edge_labels(edges: tuple[Edge, ...]) -> list[str]:
    """
    Labels "u--v" in edge order; repeated parallel edges get "#2", "#3", ...
    """
    seen: Counter = Counter()
    labels = []
    for edge in edges:
        seen[edge] += 1
        label = format_edge(edge)
        labels.append(label if seen[edge] == 1 else f"{label}#{seen[edge]}")
    return labels


@dataclass
class InstanceFile:
    """Instance document"""

    ell: int
    vertices_g: list[str]
    edges_g: list[Edge]
    vertices_h: list[str]
    edges_h: list[Edge]
    pages_h: list[int]
    meta: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_json(cls, data: Any) -> "InstanceFile":
        """
        Raises:
            InstanceParseError: A key is missing or has the wrong shape
        """
        if not isinstance(data, dict):
            raise InstanceParseError("Instance document must be a JSON object")
        ell = _require(data, "ell", int)
        pages_h = _require(data, "pages_h", list)
        if not all(isinstance(p, int) and not isinstance(p, bool) for p in pages_h):
            raise InstanceParseError("expected an array of integers", "pages_h")
        edges_h = _edge_list(data, "edges_h")
        if len(pages_h) != len(edges_h):
            raise InstanceParseError(f"{len(pages_h)} pages for {len(edges_h)} edges of H", "pages_h")
        return cls(
            ell=ell,
            vertices_g=_string_list(data, "vertices_g"),
            edges_g=_edge_list(data, "edges_g"),
            vertices_h=_string_list(data, "vertices_h"),
            edges_h=edges_h,
            pages_h=pages_h,
            meta=_require(data, "meta", dict, optional=True) or {},
        )

    @classmethod
    def loads(cls, text: str) -> "InstanceFile":
        return cls.from_json(_parse_json(text))

    @classmethod
    def load(cls, path: Union[str, Path]) -> "InstanceFile":
        return cls.loads(Path(path).read_text(encoding="utf-8"))

    def to_instance(self) -> Instance:
        """
        Build the instance the document describes.

        Raises:
            InstanceParseError: The document does not describe a valid instance
        """
        multi = any(n > 1 for n in Counter(self.edges_g).values())
        try:
            g = Graph(tuple(self.vertices_g), tuple(self.edges_g), multi=multi)
        except ValidationError as e:
            raise InstanceParseError(str(e), "edges_g") from e
        try:
            h = Graph(tuple(self.vertices_h), tuple(self.edges_h), multi=multi)
        except ValidationError as e:
            raise InstanceParseError(str(e), "edges_h") from e
        if not h.vertex_set <= g.vertex_set:
            raise InstanceParseError(f"vertices outside G: {sorted(h.vertex_set - g.vertex_set)}", "vertices_h")
        if h.edge_counts - g.edge_counts:
            extra = [format_edge(e) for e in h.edge_counts - g.edge_counts]
            raise InstanceParseError(f"edges outside G: {extra}", "edges_h")
        if self.ell < 0:
            raise InstanceParseError("page count must be non-negative", "ell")
        try:
            assignment = PageAssignment(tuple(zip(self.edges_h, self.pages_h)), self.ell)
            layout_h = QueueLayout(SpineOrder(tuple(self.vertices_h)), assignment)
            return Instance(
                ell=self.ell,
                g=g,
                h=h,
                layout_h=layout_h,
                known_solvable=self.meta.get("known_solvable"),
                meta=self.meta,
            )
        except (ValidationError, StructuralError) as e:
            raise InstanceParseError(str(e), "pages_h") from e

    @classmethod
    def from_instance(cls, inst: Instance) -> "InstanceFile":
        meta = dict(inst.meta)
        if inst.known_solvable is not None:
            meta["known_solvable"] = inst.known_solvable
        entries = inst.layout_h.assignment.entries
        return cls(
            ell=inst.ell,
            vertices_g=list(inst.g.vertices),
            edges_g=list(inst.g.edges),
            vertices_h=list(inst.layout_h.spine.order),
            edges_h=[edge for edge, _ in entries],
            pages_h=[page for _, page in entries],
            meta=meta,
        )

    def to_json(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "ell": self.ell,
            "vertices_g": list(self.vertices_g),
            "edges_g": [list(e) for e in self.edges_g],
            "vertices_h": list(self.vertices_h),
            "edges_h": [list(e) for e in self.edges_h],
            "pages_h": list(self.pages_h),
        }
        if self.meta:
            data["meta"] = self.meta
        return data

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n"


@dataclass
class SolutionFile:
    """Solution document: spine of all of V(G) and the page of every edge of G"""

    spine: list[str]
    pages: dict[str, int]
    algorithm: str
    stats: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_layout(
        cls,
        inst: Instance,
        layout: QueueLayout,
        algorithm: str,
        stats: Optional[dict[str, Any]] = None,
    ) -> "SolutionFile":
        """Document of a layout extending the layout of H"""
        old = inst.layout_h.assignment.entries
        labels = edge_labels(tuple(edge for edge, _ in old) + inst.e_add)
        pages = [page for _, page in old] + [layout.page_of(e) for e in inst.e_add]
        return cls(
            spine=list(layout.spine.order),
            pages=dict(zip(labels, pages)),
            algorithm=algorithm,
            stats=dict(stats or {}),
        )

    @classmethod
    def from_result(cls, inst: Instance, result: SolveResult, timing: bool = True) -> "SolutionFile":
        """
        Raises:
            ValueError: The result carries no layout
        """
        if result.layout is None:
            raise ValueError(f"No layout to write for a {result.status.value} result")
        stats = result.stats.to_dict()
        if timing:
            stats["wall_ms"] = round(result.wall_ms, 3)
        return cls.from_layout(inst, result.layout, result.algorithm.value, stats)

    @classmethod
    def from_json(cls, data: Any) -> "SolutionFile":
        if not isinstance(data, dict):
            raise InstanceParseError("Solution document must be a JSON object")
        pages = _require(data, "pages", dict)
        if not all(isinstance(p, int) and not isinstance(p, bool) for p in pages.values()):
            raise InstanceParseError("expected integer pages", "pages")
        return cls(
            spine=_string_list(data, "spine"),
            pages=pages,
            algorithm=_require(data, "algorithm", str, optional=True) or "",
            stats=_require(data, "stats", dict, optional=True) or {},
        )

    @classmethod
    def loads(cls, text: str) -> "SolutionFile":
        return cls.from_json(_parse_json(text))

    @classmethod
    def load(cls, path: Union[str, Path]) -> "SolutionFile":
        return cls.loads(Path(path).read_text(encoding="utf-8"))

    def to_json(self) -> dict[str, Any]:
        return {
            "spine": list(self.spine),
            "pages": dict(self.pages),
            "algorithm": self.algorithm,
            "stats": dict(self.stats),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n"

    def to_layout(self, inst: Instance) -> QueueLayout:
        """
        Layout of G the document describes.

        Raises:
            InstanceParseError: Pages miss or add edges of G, or a page is out of range
        """
        ordered = inst.layout_h.assignment.entries
        edges = tuple(edge for edge, _ in ordered) + inst.e_add
        labels = edge_labels(edges)
        missing = [label for label in labels if label not in self.pages]
        if missing:
            raise InstanceParseError(f"no page for {missing}", "pages")
        extra = sorted(set(self.pages) - set(labels))
        if extra:
            raise InstanceParseError(f"edges outside G: {extra}", "pages")
        try:
            spine = SpineOrder(tuple(self.spine))
            assignment = PageAssignment(
                tuple((edge, self.pages[label]) for edge, label in zip(edges, labels)), inst.ell
            )
        except ValidationError as e:
            raise InstanceParseError(str(e), "pages") from e
        return QueueLayout(spine, assignment)

    def validate_against(self, inst: Instance) -> ValidationReport:
        """
        Raises:
            InstanceParseError: The document does not describe a layout of G
        """
        from ..core import validate_layout

        layout = self.to_layout(inst)
        try:
            return validate_layout(inst.g, layout)
        except StructuralError as e:
            raise InstanceParseError(str(e), "spine") from e

    def extends_instance(self, inst: Instance) -> bool:
        """True if the layout keeps the spine order and pages of H"""
        from ..core import extends

        return extends(self.to_layout(inst), inst.layout_h)
