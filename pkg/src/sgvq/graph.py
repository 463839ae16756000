"""Tripartite scene-graph data model.

A scene graph has three node kinds. Subjects are objects in the scene
("man", "dog"), relationships are predicates ("feeding", "sit on") and
attributes are descriptive leaves ("tall", "long hair"). Edges may only run
subject -> relationship, relationship -> subject or subject -> attribute.
"""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator

import numpy as np

from .errors import GraphParseError, NotFoundError, ValidationError


class NodeKind(str, enum.Enum):
    # Declaration order doubles as canonical sort order.
    ATTRIBUTE = "attribute"
    RELATIONSHIP = "relationship"
    SUBJECT = "subject"

    @property
    def rank(self) -> int:
        return _KIND_RANK[self]


_KIND_RANK = {kind: i for i, kind in enumerate(NodeKind)}

ALLOWED_EDGES = frozenset(
    {
        (NodeKind.SUBJECT, NodeKind.RELATIONSHIP),
        (NodeKind.RELATIONSHIP, NodeKind.SUBJECT),
        (NodeKind.SUBJECT, NodeKind.ATTRIBUTE),
    }
)

# (kind, label) identifies a node class for adjacency export and similarity.
Key = tuple[NodeKind, str]


def key_sort(key: Key) -> tuple[int, str]:
    return (key[0].rank, key[1])


def normalize_label(label: str) -> str:
    return " ".join(str(label).lower().split())


@dataclass(frozen=True)
class BoundingBox:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        if not (self.w > 0 and self.h > 0):
            raise ValidationError(f"bbox extent must be positive, got w={self.w} h={self.h}")
        if self.x < 0 or self.y < 0:
            raise ValidationError(f"bbox corner must be non-negative, got x={self.x} y={self.y}")

    @property
    def area(self) -> float:
        return self.w * self.h

    @classmethod
    def from_list(cls, values: Iterable[float]) -> BoundingBox:
        vals = list(values)
        if len(vals) != 4:
            raise ValidationError(f"bbox needs 4 numbers [x, y, w, h], got {len(vals)}")
        for v in vals:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValidationError(f"bbox entries must be numbers, got {v!r}")
        return cls(*(float(v) for v in vals))

    def to_list(self) -> list[float]:
        return [self.x, self.y, self.w, self.h]


@dataclass(frozen=True)
class Node:
    id: int
    kind: NodeKind
    label: str
    bbox: BoundingBox | None = None

    @property
    def key(self) -> Key:
        return (self.kind, self.label)


@dataclass
class Edge:
    src: int
    dst: int
    timestamps: list[float] = field(default_factory=list)

    def add_timestamp(self, t: float) -> None:
        """Insert ``t`` keeping the list strictly increasing (duplicates are dropped)."""
        ts = self.timestamps
        if not ts or t > ts[-1]:
            ts.append(t)
        elif t not in ts:
            ts.append(t)
            ts.sort()


class SceneGraph:
    """Tripartite labeled digraph for one frame (or one caption fragment)."""

    def __init__(self, frame_index: int = 0, timestamp_s: float = 0.0):
        if frame_index < 0:
            raise ValidationError(f"frame_index must be >= 0, got {frame_index}")
        self.frame_index = frame_index
        self.timestamp_s = float(timestamp_s)
        self.nodes: dict[int, Node] = {}
        self.edges: dict[tuple[int, int], Edge] = {}
        self._next_id = 0

    def __repr__(self) -> str:
        return (
            f"{type(self).__name__}(frame_index={self.frame_index}, "
            f"nodes={len(self.nodes)}, edges={len(self.edges)})"
        )

    def __len__(self) -> int:
        return len(self.nodes)

    # -- construction -------------------------------------------------

    def add_node(
        self,
        kind: NodeKind | str,
        label: str,
        bbox: BoundingBox | None = None,
        *,
        node_id: int | None = None,
    ) -> int:
        kind = NodeKind(kind)
        norm = normalize_label(label)
        if not norm:
            raise ValidationError("node label is empty after normalization")
        if bbox is not None and kind is not NodeKind.SUBJECT:
            raise ValidationError(f"only subject nodes carry a bbox ({kind.value} {norm!r} given one)")
        if node_id is None:
            node_id = self._next_id
        elif node_id in self.nodes:
            raise ValidationError(f"duplicate node id {node_id}")
        self.nodes[node_id] = Node(node_id, kind, norm, bbox)
        self._next_id = max(self._next_id, node_id + 1)
        return node_id

    def add_edge(self, src: int, dst: int, timestamp: float | None = None) -> Edge:
        for end in (src, dst):
            if end not in self.nodes:
                raise NotFoundError(f"node {end} does not exist")
        if src == dst:
            raise ValidationError(f"self-loop on node {src}")
        pair = (self.nodes[src].kind, self.nodes[dst].kind)
        if pair not in ALLOWED_EDGES:
            raise ValidationError(
                f"edge {pair[0].value} -> {pair[1].value} not allowed "
                f"({self.nodes[src].label!r} -> {self.nodes[dst].label!r})"
            )
        edge = self.edges.get((src, dst))
        if edge is None:
            edge = self.edges[(src, dst)] = Edge(src, dst)
        if timestamp is not None:
            edge.add_timestamp(float(timestamp))
        return edge

    def remove_node(self, node_id: int) -> None:
        if node_id not in self.nodes:
            raise NotFoundError(f"node {node_id} does not exist")
        del self.nodes[node_id]
        for pair in [p for p in self.edges if node_id in p]:
            del self.edges[pair]

    def copy(self) -> SceneGraph:
        other = type(self).__new__(type(self))
        other.__dict__.update(self.__dict__)
        other.nodes = dict(self.nodes)
        other.edges = {p: Edge(e.src, e.dst, list(e.timestamps)) for p, e in self.edges.items()}
        return other

    # -- read access --------------------------------------------------

    def nodes_of(self, kind: NodeKind) -> Iterator[Node]:
        return (n for n in self.nodes.values() if n.kind is kind)

    def successors(self, node_id: int) -> list[int]:
        return [d for (s, d) in self.edges if s == node_id]

    def predecessors(self, node_id: int) -> list[int]:
        return [s for (s, d) in self.edges if d == node_id]

    def attr_set(self, subject_id: int) -> set[str]:
        node = self.nodes.get(subject_id)
        if node is None:
            raise NotFoundError(f"node {subject_id} does not exist")
        if node.kind is not NodeKind.SUBJECT:
            raise ValidationError(f"attr_set needs a subject node, {subject_id} is {node.kind.value}")
        return {
            self.nodes[d].label
            for (s, d) in self.edges
            if s == subject_id and self.nodes[d].kind is NodeKind.ATTRIBUTE
        }

    def keys(self) -> set[Key]:
        return {n.key for n in self.nodes.values()}

    def key_edges(self) -> set[tuple[Key, Key]]:
        return {(self.nodes[s].key, self.nodes[d].key) for (s, d) in self.edges}

    def validate(self) -> None:
        """Re-check every structural invariant; raises ValidationError."""
        for node in self.nodes.values():
            if not node.label or node.label != normalize_label(node.label):
                raise ValidationError(f"node {node.id} label {node.label!r} is not normalized")
            if node.bbox is not None and node.kind is not NodeKind.SUBJECT:
                raise ValidationError(f"node {node.id}: bbox on non-subject")
        for (s, d), edge in self.edges.items():
            if s not in self.nodes or d not in self.nodes:
                raise ValidationError(f"edge ({s}, {d}) has a missing endpoint")
            if s == d:
                raise ValidationError(f"self-loop on node {s}")
            if (self.nodes[s].kind, self.nodes[d].kind) not in ALLOWED_EDGES:
                raise ValidationError(f"edge ({s}, {d}) joins a forbidden kind pair")
            ts = edge.timestamps
            if any(b <= a for a, b in zip(ts, ts[1:])):
                raise ValidationError(f"edge ({s}, {d}) timestamps not strictly increasing")


@dataclass(frozen=True)
class Vocabulary:
    labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(sorted(set(self.labels))))
        object.__setattr__(self, "_index", {label: i for i, label in enumerate(self.labels)})

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label: object) -> bool:
        return label in self._index  # type: ignore[attr-defined]

    def index(self, label: str) -> int:
        try:
            return self._index[label]  # type: ignore[attr-defined]
        except KeyError:
            raise NotFoundError(f"label {label!r} not in vocabulary") from None


class AggregatedGraph(SceneGraph):
    """Video-level graph: timestamped edges, subject class map and vocabularies."""

    def __init__(self, frame_index: int = 0, timestamp_s: float = 0.0):
        super().__init__(frame_index, timestamp_s)
        self.node_types: dict[int, str] = {}
        self.attr_vocab = Vocabulary()
        self.rel_vocab = Vocabulary()

    def add_node(self, kind, label, bbox=None, *, node_id=None) -> int:
        nid = super().add_node(kind, label, bbox, node_id=node_id)
        node = self.nodes[nid]
        if node.kind is NodeKind.SUBJECT:
            self.node_types[nid] = node.label
        return nid

    def remove_node(self, node_id: int) -> None:
        super().remove_node(node_id)
        self.node_types.pop(node_id, None)

    def copy(self) -> AggregatedGraph:
        other = super().copy()
        other.node_types = dict(self.node_types)
        return other  # type: ignore[return-value]

    def refresh_vocabs(self) -> None:
        self.attr_vocab = Vocabulary(tuple(n.label for n in self.nodes_of(NodeKind.ATTRIBUTE)))
        self.rel_vocab = Vocabulary(tuple(n.label for n in self.nodes_of(NodeKind.RELATIONSHIP)))

    def validate(self) -> None:
        super().validate()
        for node in self.nodes_of(NodeKind.SUBJECT):
            if node.id not in self.node_types:
                raise ValidationError(f"subject node {node.id} missing from node_types")
        for node in self.nodes_of(NodeKind.ATTRIBUTE):
            if node.label not in self.attr_vocab:
                raise ValidationError(f"attribute {node.label!r} missing from attr_vocab")
        for node in self.nodes_of(NodeKind.RELATIONSHIP):
            if node.label not in self.rel_vocab:
                raise ValidationError(f"relationship {node.label!r} missing from rel_vocab")


@dataclass(frozen=True)
class AdjacencyMatrix:
    order: tuple[Key, ...]
    cells: np.ndarray

    @property
    def n(self) -> int:
        return len(self.order)

    def index(self, kind: NodeKind | str, label: str) -> int:
        return self.order.index((NodeKind(kind), label))

    def cell(self, src: tuple[NodeKind | str, str], dst: tuple[NodeKind | str, str]) -> int:
        return int(self.cells[self.index(*src), self.index(*dst)])


def to_adjacency(graph: SceneGraph, order: Iterable[Key] | None = None) -> AdjacencyMatrix:
    """Binary adjacency over canonical (kind, label) keys.

    Nodes sharing a key collapse onto one row/column. Passing ``order``
    embeds the graph into a larger key set; keys absent from the graph
    stay zero.
    """
    keys = tuple(sorted(graph.keys() if order is None else set(order), key=key_sort))
    pos = {k: i for i, k in enumerate(keys)}
    cells = np.zeros((len(keys), len(keys)), dtype=np.uint8)
    for (s, d) in graph.edges:
        cells[pos[graph.nodes[s].key], pos[graph.nodes[d].key]] = 1
    return AdjacencyMatrix(keys, cells)


def degree_stats(graph: SceneGraph) -> list[tuple[int, int]]:
    """Histogram of total (in + out) degree as sorted (degree, count) pairs."""
    degree = Counter({nid: 0 for nid in graph.nodes})
    for (s, d) in graph.edges:
        degree[s] += 1
        degree[d] += 1
    return sorted(Counter(degree.values()).items())


# -- serialization -------------------------------------------------------

_GRAPH_FIELDS = {"frame_index", "timestamp_s", "nodes", "edges"}
_AGG_FIELDS = _GRAPH_FIELDS | {"node_types", "attr_vocab", "rel_vocab"}
_NODE_FIELDS = {"id", "kind", "label", "bbox"}
_EDGE_FIELDS = {"src", "dst", "t"}


def graph_to_dict(graph: SceneGraph) -> dict[str, Any]:
    nodes = []
    for nid in sorted(graph.nodes):
        node = graph.nodes[nid]
        entry: dict[str, Any] = {"id": nid, "kind": node.kind.value, "label": node.label}
        if node.bbox is not None:
            entry["bbox"] = node.bbox.to_list()
        nodes.append(entry)
    edges = []
    for pair in sorted(graph.edges):
        edge = graph.edges[pair]
        entry = {"src": edge.src, "dst": edge.dst}
        if edge.timestamps:
            entry["t"] = list(edge.timestamps)
        edges.append(entry)
    out: dict[str, Any] = {
        "frame_index": graph.frame_index,
        "timestamp_s": graph.timestamp_s,
        "nodes": nodes,
        "edges": edges,
    }
    if isinstance(graph, AggregatedGraph):
        out["node_types"] = {str(k): graph.node_types[k] for k in sorted(graph.node_types)}
        out["attr_vocab"] = list(graph.attr_vocab.labels)
        out["rel_vocab"] = list(graph.rel_vocab.labels)
    return out


def serialize(graph: SceneGraph) -> str:
    return json.dumps(graph_to_dict(graph), indent=2) + "\n"


def _expect(cond: bool, field_name: str, message: str) -> None:
    if not cond:
        raise GraphParseError(field_name, message)


def _is_int(v: Any) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def graph_from_dict(data: Any, aggregated: bool | None = None) -> SceneGraph:
    _expect(isinstance(data, dict), "<root>", "expected a JSON object")
    if aggregated is None:
        aggregated = "node_types" in data
    allowed = _AGG_FIELDS if aggregated else _GRAPH_FIELDS
    unknown = set(data) - allowed
    _expect(not unknown, sorted(unknown)[0] if unknown else "", "unknown field")
    for name in ("frame_index", "timestamp_s", "nodes", "edges"):
        _expect(name in data, name, "missing required field")
    _expect(_is_int(data["frame_index"]) and data["frame_index"] >= 0, "frame_index", "must be an integer >= 0")
    _expect(_is_num(data["timestamp_s"]), "timestamp_s", "must be a number")
    graph: SceneGraph = (AggregatedGraph if aggregated else SceneGraph)(data["frame_index"], data["timestamp_s"])

    _expect(isinstance(data["nodes"], list), "nodes", "must be a list")
    for i, entry in enumerate(data["nodes"]):
        where = f"nodes[{i}]"
        _expect(isinstance(entry, dict), where, "must be an object")
        unknown = set(entry) - _NODE_FIELDS
        _expect(not unknown, f"{where}.{sorted(unknown)[0]}" if unknown else where, "unknown field")
        for name in ("id", "kind", "label"):
            _expect(name in entry, f"{where}.{name}", "missing required field")
        _expect(_is_int(entry["id"]), f"{where}.id", "must be an integer")
        _expect(entry["kind"] in {k.value for k in NodeKind}, f"{where}.kind", f"unknown kind {entry['kind']!r}")
        _expect(isinstance(entry["label"], str), f"{where}.label", "must be a string")
        bbox = None
        if "bbox" in entry:
            try:
                bbox = BoundingBox.from_list(entry["bbox"])
            except (ValidationError, TypeError) as exc:
                raise GraphParseError(f"{where}.bbox", str(exc)) from None
        try:
            graph.add_node(entry["kind"], entry["label"], bbox, node_id=entry["id"])
        except ValidationError as exc:
            raise GraphParseError(where, str(exc)) from None

    _expect(isinstance(data["edges"], list), "edges", "must be a list")
    for i, entry in enumerate(data["edges"]):
        where = f"edges[{i}]"
        _expect(isinstance(entry, dict), where, "must be an object")
        unknown = set(entry) - _EDGE_FIELDS
        _expect(not unknown, f"{where}.{sorted(unknown)[0]}" if unknown else where, "unknown field")
        for name in ("src", "dst"):
            _expect(name in entry, f"{where}.{name}", "missing required field")
            _expect(_is_int(entry[name]), f"{where}.{name}", "must be an integer")
            _expect(entry[name] in graph.nodes, f"{where}.{name}", f"references missing node {entry[name]}")
        _expect((entry["src"], entry["dst"]) not in graph.edges, where, "duplicate edge")
        ts = entry.get("t", [])
        _expect(isinstance(ts, list) and all(_is_num(t) for t in ts), f"{where}.t", "must be a list of numbers")
        _expect(all(b > a for a, b in zip(ts, ts[1:])), f"{where}.t", "timestamps must be strictly increasing")
        try:
            edge = graph.add_edge(entry["src"], entry["dst"])
        except ValidationError as exc:
            raise GraphParseError(where, str(exc)) from None
        edge.timestamps.extend(float(t) for t in ts)

    if isinstance(graph, AggregatedGraph):
        types = data.get("node_types", {})
        _expect(isinstance(types, dict), "node_types", "must be an object")
        graph.node_types = {}
        for k, v in types.items():
            try:
                nid = int(k)
            except ValueError:
                raise GraphParseError(f"node_types.{k}", "key must be an integer id") from None
            _expect(nid in graph.nodes and graph.nodes[nid].kind is NodeKind.SUBJECT,
                    f"node_types.{k}", "must reference a subject node")
            _expect(isinstance(v, str) and v, f"node_types.{k}", "must be a non-empty string")
            graph.node_types[nid] = v
        for name in ("attr_vocab", "rel_vocab"):
            labels = data.get(name, [])
            _expect(isinstance(labels, list) and all(isinstance(x, str) for x in labels), name, "must be a list of strings")
            _expect(len(set(labels)) == len(labels), name, "labels must be unique")
            setattr(graph, name, Vocabulary(tuple(labels)))
        try:
            graph.validate()
        except ValidationError as exc:
            raise GraphParseError("node_types" if "node_types" in str(exc) else "vocab", str(exc)) from None
    return graph


def deserialize(text: str) -> SceneGraph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphParseError("<root>", f"invalid JSON: {exc}") from None
    return graph_from_dict(data)


def canonical_form(graph: SceneGraph) -> tuple:
    """Id-free structural signature used for round-trip and isomorphism-light checks."""
    nodes = sorted(
        (key_sort(n.key), tuple(n.bbox.to_list()) if n.bbox else ()) for n in graph.nodes.values()
    )
    edges = sorted(
        (key_sort(graph.nodes[s].key), key_sort(graph.nodes[d].key), tuple(e.timestamps))
        for (s, d), e in graph.edges.items()
    )
    return (graph.frame_index, graph.timestamp_s, tuple(nodes), tuple(edges))
