"""Graph and node similarity measures.

* ``spectral_sim`` -- one minus the size-normalized Frobenius norm of the
  difference between two adjacency matrices embedded over the union of
  both graphs' (kind, label) keys.
* ``mcs_sim`` -- |mcs| / (|g1| + |g2| - |mcs|) with sizes counted in nodes.
  The common subgraph is the maximum common *induced* subgraph under a
  kind- and label-preserving mapping, found by McSplit-style branch and
  bound.
* ``node_sim`` (Jaccard over attribute labels) and ``iou`` for boxes.
"""

from __future__ import annotations

import csv
import enum
import io
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetExceeded, ValidationError
from .graph import BoundingBox, Key, SceneGraph, key_sort, to_adjacency

logger = logging.getLogger(__name__)


class Measure(str, enum.Enum):
    SPECTRAL = "spectral"
    MCS = "mcs"


@dataclass(frozen=True)
class McsBudget:
    max_nodes: int = 30
    time_limit_ms: float = 5000.0

    def __post_init__(self) -> None:
        if self.max_nodes <= 0 or self.time_limit_ms <= 0:
            raise ValidationError("MCS budget values must be positive")


DEFAULT_BUDGET = McsBudget()


def iou(a: BoundingBox, b: BoundingBox) -> float:
    ix = max(0.0, min(a.x + a.w, b.x + b.w) - max(a.x, b.x))
    iy = max(0.0, min(a.y + a.h, b.y + b.h) - max(a.y, b.y))
    inter = ix * iy
    union = a.area + b.area - inter
    return inter / union if union > 0 else 0.0


def node_sim(attr_u: Iterable[str], attr_v: Iterable[str]) -> float:
    u, v = set(attr_u), set(attr_v)
    union = u | v
    if not union:
        return 1.0
    return len(u & v) / len(union)


# -- spectral --------------------------------------------------------------


@dataclass(frozen=True)
class SpectralResult:
    score: float
    n: int
    norm: float
    cells: int  # matrix cells compared; always n * n


def spectral_compare(g1: SceneGraph, g2: SceneGraph) -> SpectralResult:
    order = sorted(g1.keys() | g2.keys(), key=key_sort)
    n = len(order)
    if n == 0:
        return SpectralResult(1.0, 0, 0.0, 0)
    a = to_adjacency(g1, order).cells.astype(np.int8)
    b = to_adjacency(g2, order).cells.astype(np.int8)
    diff = a - b
    norm = float(np.linalg.norm(diff, "fro"))
    score = min(1.0, max(0.0, 1.0 - norm / n))
    return SpectralResult(score, n, norm, int(diff.size))


def spectral_sim(g1: SceneGraph, g2: SceneGraph) -> float:
    return spectral_compare(g1, g2).score


# -- maximum common induced subgraph -------------------------------------


@dataclass
class _Side:
    keys: list[Key]
    out: list[set[int]]
    inc: list[set[int]]
    ids: list[int]

    @classmethod
    def of(cls, graph: SceneGraph) -> _Side:
        ids = sorted(graph.nodes, key=lambda nid: (key_sort(graph.nodes[nid].key), nid))
        pos = {nid: i for i, nid in enumerate(ids)}
        out: list[set[int]] = [set() for _ in ids]
        inc: list[set[int]] = [set() for _ in ids]
        for (s, d) in graph.edges:
            out[pos[s]].add(pos[d])
            inc[pos[d]].add(pos[s])
        return cls([graph.nodes[i].key for i in ids], out, inc, ids)

    def state(self, v: int, x: int) -> int:
        return (x in self.out[v]) | ((x in self.inc[v]) << 1)

    def twins(self, a: int, b: int) -> bool:
        return (
            self.keys[a] == self.keys[b]
            and self.out[a] - {b} == self.out[b] - {a}
            and self.inc[a] - {b} == self.inc[b] - {a}
        )


@dataclass
class McsResult:
    mapping: list[tuple[int, int]]  # (g1 node id, g2 node id)
    subgraph: SceneGraph
    nodes_explored: int = 0

    @property
    def size(self) -> int:
        return len(self.mapping)


class _Search:
    def __init__(self, g1: SceneGraph, g2: SceneGraph, budget: McsBudget):
        self.a = _Side.of(g1)
        self.b = _Side.of(g2)
        self.deadline = time.monotonic() + budget.time_limit_ms / 1000.0
        self.best: list[tuple[int, int]] = []
        self.best_key: tuple | None = None
        self.explored = 0

    def tie_key(self, mapping: list[tuple[int, int]]) -> tuple:
        labels = tuple(sorted(key_sort(self.a.keys[v]) for v, _ in mapping))
        chosen = {v for v, _ in mapping}
        edges = tuple(
            sorted(
                (key_sort(self.a.keys[v]), key_sort(self.a.keys[x]))
                for v in chosen
                for x in self.a.out[v]
                if x in chosen
            )
        )
        return (labels, edges)

    def consider(self, mapping: list[tuple[int, int]]) -> None:
        if len(mapping) < len(self.best):
            return
        key = self.tie_key(mapping)
        if len(mapping) > len(self.best) or self.best_key is None or key < self.best_key:
            self.best = list(mapping)
            self.best_key = key

    def run(self) -> None:
        groups: dict[Key, tuple[list[int], list[int]]] = {}
        for i, k in enumerate(self.a.keys):
            groups.setdefault(k, ([], []))[0].append(i)
        for j, k in enumerate(self.b.keys):
            if k in groups:
                groups[k][1].append(j)
        classes = [(l, r) for k, (l, r) in sorted(groups.items(), key=lambda kv: key_sort(kv[0])) if r]
        self.consider([])
        self.expand(classes, [])

    def expand(self, classes: list[tuple[list[int], list[int]]], mapping: list[tuple[int, int]]) -> None:
        self.explored += 1
        if self.explored & 0xFF == 0 and time.monotonic() > self.deadline:
            raise BudgetExceeded("MCS time limit exceeded")
        self.consider(mapping)
        bound = len(mapping) + sum(min(len(l), len(r)) for l, r in classes)
        # Ties must still be explored so the canonical tie-break is exact.
        if not classes or bound < len(self.best):
            return
        ci = min(range(len(classes)), key=lambda c: (max(len(classes[c][0]), len(classes[c][1])), c))
        left, right = classes[ci]
        v = left[0]
        tried: list[int] = []
        for w in right:
            if any(self.b.twins(w, t) for t in tried):
                continue
            tried.append(w)
            new_classes = []
            for idx, (l, r) in enumerate(classes):
                l2 = [x for x in l if x != v]
                r2 = [y for y in r if y != w]
                for st in range(4):
                    ls = [x for x in l2 if self.a.state(v, x) == st]
                    if not ls:
                        continue
                    rs = [y for y in r2 if self.b.state(w, y) == st]
                    if rs:
                        new_classes.append((ls, rs))
            self.expand(new_classes, mapping + [(v, w)])
        rest = [x for x in left if x != v]
        remaining = [c for i, c in enumerate(classes) if i != ci]
        if rest:
            remaining.insert(ci, (rest, right))
        self.expand(remaining, mapping)


def mcs(g1: SceneGraph, g2: SceneGraph, budget: McsBudget = DEFAULT_BUDGET) -> McsResult:
    """Exact maximum common induced subgraph of ``g1`` and ``g2``.

    Nodes map only onto nodes of the same kind and label; a pair of mapped
    nodes is adjacent (in each direction) in ``g1`` iff their images are
    adjacent in ``g2``.  Among maximum solutions the one with the
    lexicographically smallest sorted key list wins, then the smallest
    sorted edge list.  Raises :class:`BudgetExceeded` when either graph has
    more than ``budget.max_nodes`` nodes or the time limit runs out.
    """
    for name, g in (("g1", g1), ("g2", g2)):
        if len(g.nodes) > budget.max_nodes:
            raise BudgetExceeded(f"{name} has {len(g.nodes)} nodes, budget allows {budget.max_nodes}")
    search = _Search(g1, g2, budget)
    search.run()
    mapping = sorted((search.a.ids[v], search.b.ids[w]) for v, w in search.best)
    sub = SceneGraph(g1.frame_index, g1.timestamp_s)
    for nid, _ in mapping:
        node = g1.nodes[nid]
        sub.add_node(node.kind, node.label, node.bbox, node_id=nid)
    for (s, d) in g1.edges:
        if s in sub.nodes and d in sub.nodes:
            sub.add_edge(s, d)
    return McsResult(mapping, sub, search.explored)


def mcs_sim(g1: SceneGraph, g2: SceneGraph, budget: McsBudget = DEFAULT_BUDGET) -> float:
    n1, n2 = len(g1.nodes), len(g2.nodes)
    if n1 == 0 and n2 == 0:
        return 1.0
    common = mcs(g1, g2, budget).size
    return common / (n1 + n2 - common)


def similarity(g1: SceneGraph, g2: SceneGraph, measure: Measure | str, budget: McsBudget = DEFAULT_BUDGET) -> float:
    if Measure(measure) is Measure.SPECTRAL:
        return spectral_sim(g1, g2)
    return mcs_sim(g1, g2, budget)


def similarity_with_fallback(
    g1: SceneGraph, g2: SceneGraph, measure: Measure | str, budget: McsBudget = DEFAULT_BUDGET
) -> tuple[float, bool]:
    """Like :func:`similarity`, but an MCS budget overrun falls back to spectral."""
    try:
        return similarity(g1, g2, measure, budget), False
    except BudgetExceeded as exc:
        logger.warning("MCS budget exceeded (%s); using spectral score", exc)
        return spectral_sim(g1, g2), True


# -- per-video series ----------------------------------------------------


@dataclass
class SimilaritySeries:
    video_id: str
    measure: Measure
    scores: list[float] = field(default_factory=list)
    fallback: list[int] = field(default_factory=list)  # boundary indices that used spectral

    def __post_init__(self) -> None:
        self.measure = Measure(self.measure)
        for i, s in enumerate(self.scores):
            if not (0.0 <= s <= 1.0) or math.isnan(s):
                raise ValidationError(f"score at boundary {i} out of [0, 1]: {s}")

    def __len__(self) -> int:
        return len(self.scores)

    @property
    def mean(self) -> float | None:
        return sum(self.scores) / len(self.scores) if self.scores else None

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["boundary_index", "score", "fallback"])
        flagged = set(self.fallback)
        for i, s in enumerate(self.scores):
            writer.writerow([i, repr(float(s)), int(i in flagged)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, video_id: str = "", measure: Measure | str = Measure.SPECTRAL) -> SimilaritySeries:
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["boundary_index", "score", "fallback"]:
            raise ValidationError("series CSV must start with header boundary_index,score,fallback")
        scores, fallback = [], []
        for lineno, row in enumerate(rows[1:], 2):
            try:
                idx, score, flag = int(row[0]), float(row[1]), int(row[2])
            except (ValueError, IndexError):
                raise ValidationError(f"series CSV line {lineno} is malformed: {row}") from None
            if idx != len(scores):
                raise ValidationError(f"series CSV line {lineno}: expected boundary {len(scores)}, got {idx}")
            scores.append(score)
            if flag:
                fallback.append(idx)
        return cls(video_id, Measure(measure), scores, fallback)


def frame_sim_series(
    frames: Sequence[SceneGraph],
    measure: Measure | str = Measure.SPECTRAL,
    budget: McsBudget = DEFAULT_BUDGET,
    video_id: str = "",
) -> SimilaritySeries:
    for a, b in zip(frames, frames[1:]):
        if b.frame_index <= a.frame_index:
            raise ValidationError(f"frames out of order at frame_index {b.frame_index}")
    series = SimilaritySeries(video_id, Measure(measure))
    for i, (a, b) in enumerate(zip(frames, frames[1:])):
        score, fell_back = similarity_with_fallback(a, b, measure, budget)
        series.scores.append(score)
        if fell_back:
            series.fallback.append(i)
    return series
