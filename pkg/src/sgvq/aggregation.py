"""Video-level graph construction from per-frame scene graphs."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .graph import AggregatedGraph, Key, NodeKind, SceneGraph, Vocabulary
from .similarity import DEFAULT_BUDGET, McsBudget, Measure, SimilaritySeries, node_sim, similarity_with_fallback

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AggregationParams:
    """``m``: lookback in processed frames; ``threshold``: NodeSim needed to merge."""

    m: int = 5
    threshold: float = 0.5

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValidationError(f"m must be >= 1, got {self.m}")
        if self.threshold < 0:
            raise ValidationError(f"threshold must be >= 0, got {self.threshold}")


@dataclass(frozen=True)
class KeyframeParams:
    k: int | None = None
    theta: float | None = None

    def __post_init__(self) -> None:
        if (self.k is None) == (self.theta is None):
            raise ValidationError("keyframe selection needs exactly one of k or theta")
        if self.k is not None and self.k < 1:
            raise ValidationError(f"k must be >= 1, got {self.k}")
        if self.theta is not None and not (0.0 <= self.theta <= 1.0):
            raise ValidationError(f"theta must lie in [0, 1], got {self.theta}")

    @classmethod
    def by_count(cls, k: int) -> KeyframeParams:
        return cls(k=k)

    @classmethod
    def by_threshold(cls, theta: float) -> KeyframeParams:
        return cls(theta=theta)


def select_keyframes(series: SimilaritySeries | Sequence[float], params: KeyframeParams) -> list[int]:
    """Positions of key frames in the frame sequence the series was built from.

    A drop at boundary ``i`` is ``1 - scores[i]``; the frame after each
    selected boundary is a key frame, and frame 0 always is.
    """
    scores = list(series.scores if isinstance(series, SimilaritySeries) else series)
    if params.k is not None:
        if params.k > len(scores):
            logger.warning("k=%d exceeds %d boundaries; selecting every frame", params.k, len(scores))
            chosen = range(len(scores))
        else:
            # Largest drop == smallest score; earliest boundary wins ties.
            chosen = sorted(range(len(scores)), key=lambda i: (scores[i], i))[: params.k]
    else:
        chosen = [i for i, s in enumerate(scores) if s <= params.theta]
    return sorted({0} | {i + 1 for i in chosen})


# -- NodeSim merging ---------------------------------------------------------


class _Folder:
    """Incremental aggregate state shared by the fold-style builders."""

    def __init__(self) -> None:
        self.graph = AggregatedGraph()
        self.by_label: dict[Key, int] = {}
        self.last_seen: dict[int, int] = {}  # subject id -> fold step it was last touched
        self.step = -1

    def shared_node(self, kind: NodeKind, label: str) -> int:
        key = (kind, label)
        nid = self.by_label.get(key)
        if nid is None:
            nid = self.by_label[key] = self.graph.add_node(kind, label)
        return nid

    def add_edges(self, frame: SceneGraph, mapping: dict[int, int]) -> None:
        for (s, d) in sorted(frame.edges):
            ms, md = mapping[s], mapping[d]
            if ms != md:
                self.graph.add_edge(ms, md, frame.timestamp_s)

    def finish(self, frames: Sequence[SceneGraph]) -> AggregatedGraph:
        g = self.graph
        if frames:
            g.frame_index = frames[0].frame_index
            g.timestamp_s = frames[0].timestamp_s
        g.refresh_vocabs()
        return g


def _check_order(frames: Sequence[SceneGraph]) -> None:
    for a, b in zip(frames, frames[1:]):
        if b.timestamp_s < a.timestamp_s:
            raise ValidationError(f"frames not ordered by timestamp at frame_index {b.frame_index}")


def aggregate_nodesim(frames: Sequence[SceneGraph], params: AggregationParams = AggregationParams()) -> AggregatedGraph:
    """Fold frame graphs into one aggregate, keeping distinct instances apart.

    Each incoming subject is compared (NodeSim over attribute labels) with
    same-class subjects touched in the current or previous ``params.m``
    folded frames.  The best candidate (most recent on ties) absorbs it when
    the score reaches ``params.threshold``; otherwise a new subject is
    created.  Relationship and attribute nodes are shared by label.
    """
    if not isinstance(params, AggregationParams):
        raise ValidationError("params must be AggregationParams")
    _check_order(frames)
    fold = _Folder()
    g = fold.graph
    for frame in frames:
        fold.step += 1
        mapping: dict[int, int] = {}
        for nid in sorted(frame.nodes):
            node = frame.nodes[nid]
            if node.kind is not NodeKind.SUBJECT:
                mapping[nid] = fold.shared_node(node.kind, node.label)
        for nid in sorted(frame.nodes):
            node = frame.nodes[nid]
            if node.kind is not NodeKind.SUBJECT:
                continue
            attrs = frame.attr_set(nid)
            best: tuple[float, int, int] | None = None
            for cid, label in g.node_types.items():
                if label != node.label or fold.step - fold.last_seen[cid] > params.m:
                    continue
                cand = (node_sim(attrs, g.attr_set(cid)), fold.last_seen[cid], cid)
                if best is None or cand > best:
                    best = cand
            if best is not None and best[0] >= params.threshold:
                target = best[2]
            else:
                target = g.add_node(NodeKind.SUBJECT, node.label)
            mapping[nid] = target
            fold.last_seen[target] = fold.step
            # Attribute edges land now so later same-frame instances see them.
            for a in sorted(frame.successors(nid)):
                if frame.nodes[a].kind is NodeKind.ATTRIBUTE:
                    g.add_edge(target, mapping[a], frame.timestamp_s)
        fold.add_edges(frame, mapping)
    return fold.finish(frames)


def aggregate_bag_of_nodes(frames: Sequence[SceneGraph]) -> AggregatedGraph:
    """Collapse every node onto its (kind, label); instances are not kept apart."""
    _check_order(frames)
    fold = _Folder()
    for frame in frames:
        mapping = {nid: fold.shared_node(n.kind, n.label) for nid, n in sorted(frame.nodes.items())}
        fold.add_edges(frame, mapping)
    return fold.finish(frames)


def aggregate_keyframes(
    frames: Sequence[SceneGraph],
    series: SimilaritySeries,
    kf_params: KeyframeParams,
    agg_params: AggregationParams = AggregationParams(),
) -> AggregatedGraph:
    if len(series) != max(len(frames) - 1, 0):
        raise ValidationError(f"series has {len(series)} boundaries but there are {len(frames)} frames")
    keep = select_keyframes(series, kf_params)
    return aggregate_nodesim([frames[i] for i in keep if i < len(frames)], agg_params)


def bag_projection(graph: SceneGraph) -> AggregatedGraph:
    """Re-collapse any graph by (kind, label), merging timestamp lists."""
    fold = _Folder()
    mapping = {nid: fold.shared_node(n.kind, n.label) for nid, n in sorted(graph.nodes.items())}
    for (s, d), edge in sorted(graph.edges.items()):
        e = fold.graph.add_edge(mapping[s], mapping[d])
        for t in edge.timestamps:
            e.add_timestamp(t)
    fold.graph.frame_index, fold.graph.timestamp_s = graph.frame_index, graph.timestamp_s
    fold.graph.refresh_vocabs()
    return fold.graph


# -- vocabularies ----------------------------------------------------------


def build_vocabs(aggregate: SceneGraph) -> tuple[Vocabulary, Vocabulary]:
    attrs = tuple(n.label for n in aggregate.nodes_of(NodeKind.ATTRIBUTE))
    rels = tuple(n.label for n in aggregate.nodes_of(NodeKind.RELATIONSHIP))
    return Vocabulary(attrs), Vocabulary(rels)


def one_hot(vocab: Vocabulary, label: str) -> np.ndarray:
    vec = np.zeros(len(vocab), dtype=np.uint8)
    vec[vocab.index(label)] = 1
    return vec


# -- cross-video similarity ------------------------------------------------


@dataclass
class VideoSimMatrix:
    video_ids: list[str]
    measure: Measure
    scores: np.ndarray
    fallback: set[tuple[int, int]] = field(default_factory=set)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["video_id", *self.video_ids])
        for vid, row in zip(self.video_ids, self.scores):
            writer.writerow([vid, *(repr(float(x)) for x in row)])
        return buf.getvalue()


def video_sim_matrix(
    aggregates: Sequence[SceneGraph],
    measure: Measure | str = Measure.SPECTRAL,
    budget: McsBudget = DEFAULT_BUDGET,
    video_ids: Sequence[str] | None = None,
) -> VideoSimMatrix:
    if not aggregates:
        raise ValidationError("video_sim_matrix needs at least one aggregate")
    ids = list(video_ids) if video_ids is not None else [f"video{i}" for i in range(len(aggregates))]
    if len(ids) != len(aggregates):
        raise ValidationError("video_ids and aggregates differ in length")
    bags = [bag_projection(a) for a in aggregates]
    n = len(bags)
    scores = np.eye(n)
    fallback: set[tuple[int, int]] = set()
    for i in range(n):
        for j in range(i + 1, n):
            s, fell_back = similarity_with_fallback(bags[i], bags[j], measure, budget)
            scores[i, j] = scores[j, i] = s
            if fell_back:
                fallback |= {(i, j), (j, i)}
    return VideoSimMatrix(ids, Measure(measure), scores, fallback)

