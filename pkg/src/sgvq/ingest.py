"""Caption records in, per-frame scene graphs out."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

from .errors import (
    CaptionAuthError,
    CaptionHTTPError,
    CaptionNetworkError,
    CaptionResponseError,
    CaptionsFormatError,
    ConfigurationError,
    NotFoundError,
    ValidationError,
)
from .graph import BoundingBox, NodeKind, SceneGraph
from .parser import parse_caption
from .similarity import iou

logger = logging.getLogger(__name__)

ENV_URL = "SGVQ_CAPTIONS_URL"
ENV_KEY = "SGVQ_CAPTIONS_KEY"


@dataclass(frozen=True)
class CaptionRecord:
    text: str
    bbox: BoundingBox
    confidence: float
    frame_index: int = 0
    timestamp_s: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.confidence <= 1.0):
            raise ValidationError(f"confidence must lie in [0, 1], got {self.confidence}")
        if self.frame_index < 0:
            raise ValidationError(f"frame_index must be >= 0, got {self.frame_index}")


@dataclass
class FrameCaptions:
    frame_index: int
    timestamp_s: float
    captions: list[CaptionRecord] = field(default_factory=list)


@dataclass
class VideoCaptions:
    video_id: str
    frames: list[FrameCaptions] = field(default_factory=list)

    def validate(self) -> None:
        for prev, cur in zip(self.frames, self.frames[1:]):
            if cur.frame_index <= prev.frame_index:
                raise CaptionsFormatError("frame_index must be strictly increasing", cur.frame_index)
            if cur.timestamp_s < prev.timestamp_s:
                raise CaptionsFormatError("timestamp_s must be non-decreasing", cur.frame_index)

    def to_dict(self) -> dict[str, Any]:
        return {
            "video_id": self.video_id,
            "frames": [
                {
                    "frame_index": f.frame_index,
                    "timestamp_s": f.timestamp_s,
                    "captions": [
                        {"text": c.text, "bbox": c.bbox.to_list(), "confidence": c.confidence} for c in f.captions
                    ],
                }
                for f in self.frames
            ],
        }


def _num(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def captions_from_dict(data: Any) -> VideoCaptions:
    if not isinstance(data, dict):
        raise CaptionsFormatError("top level must be an object")
    unknown = set(data) - {"video_id", "frames"}
    if unknown:
        raise CaptionsFormatError(f"unknown field {sorted(unknown)[0]!r}")
    if not isinstance(data.get("video_id"), str) or not data["video_id"]:
        raise CaptionsFormatError("video_id must be a non-empty string")
    if not isinstance(data.get("frames"), list):
        raise CaptionsFormatError("frames must be a list")
    video = VideoCaptions(data["video_id"])
    for pos, fr in enumerate(data["frames"]):
        if not isinstance(fr, dict):
            raise CaptionsFormatError(f"frames[{pos}] must be an object")
        idx = fr.get("frame_index")
        if not isinstance(idx, int) or isinstance(idx, bool) or idx < 0:
            raise CaptionsFormatError(f"frames[{pos}].frame_index must be an integer >= 0")
        unknown = set(fr) - {"frame_index", "timestamp_s", "captions"}
        if unknown:
            raise CaptionsFormatError(f"unknown field {sorted(unknown)[0]!r}", idx)
        ts = fr.get("timestamp_s")
        if not _num(ts) or ts < 0:
            raise CaptionsFormatError("timestamp_s must be a number >= 0", idx)
        caps = fr.get("captions")
        if not isinstance(caps, list):
            raise CaptionsFormatError("captions must be a list", idx)
        frame = FrameCaptions(idx, float(ts))
        for ci, cap in enumerate(caps):
            where = f"captions[{ci}]"
            if not isinstance(cap, dict):
                raise CaptionsFormatError(f"{where} must be an object", idx)
            unknown = set(cap) - {"text", "bbox", "confidence"}
            if unknown:
                raise CaptionsFormatError(f"{where}: unknown field {sorted(unknown)[0]!r}", idx)
            if not isinstance(cap.get("text"), str):
                raise CaptionsFormatError(f"{where}.text must be a string", idx)
            if not _num(cap.get("confidence")):
                raise CaptionsFormatError(f"{where}.confidence must be a number", idx)
            try:
                bbox = BoundingBox.from_list(cap.get("bbox") or [])
                record = CaptionRecord(cap["text"], bbox, float(cap["confidence"]), idx, float(ts))
            except (ValidationError, TypeError) as exc:
                raise CaptionsFormatError(f"{where}: {exc}", idx) from None
            frame.captions.append(record)
        video.frames.append(frame)
    video.validate()
    return video


def load_captions(path: str | Path) -> VideoCaptions:
    path = Path(path)
    if not path.is_file():
        raise NotFoundError(f"captions file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CaptionsFormatError(f"{path}: invalid JSON ({exc})") from None
    try:
        return captions_from_dict(data)
    except CaptionsFormatError as exc:
        err = CaptionsFormatError(f"{path}: {exc}")
        err.frame_index = exc.frame_index
        raise err from None


def _union_into(target: SceneGraph, fragment: SceneGraph) -> dict[int, int]:
    mapping = {}
    for nid in sorted(fragment.nodes):
        n = fragment.nodes[nid]
        mapping[nid] = target.add_node(n.kind, n.label, n.bbox)
    for (s, d) in sorted(fragment.edges):
        target.add_edge(mapping[s], mapping[d])
    return mapping


def _merge_subject(graph: SceneGraph, keep: int, drop: int) -> None:
    """Move ``drop``'s edges onto ``keep`` and delete it; attribute labels stay unique."""
    have = {graph.nodes[a].label for a in graph.successors(keep) if graph.nodes[a].kind is NodeKind.ATTRIBUTE}
    for dst in sorted(graph.successors(drop)):
        node = graph.nodes[dst]
        if node.kind is NodeKind.ATTRIBUTE:
            if node.label in have:
                graph.remove_node(dst)
                continue
            have.add(node.label)
        graph.add_edge(keep, dst)
    for src in sorted(graph.predecessors(drop)):
        graph.add_edge(src, keep)
    graph.remove_node(drop)


def build_frame_graph(
    captions: Sequence[CaptionRecord],
    min_confidence: float = 0.0,
    iou_merge_threshold: float = 0.5,
    *,
    frame_index: int | None = None,
    timestamp_s: float | None = None,
    lexicon: Mapping[str, str] | None = None,
) -> SceneGraph:
    """Parse each caption and merge same-class subjects whose boxes overlap.

    Merging walks subjects in creation order; a later subject folds into
    the earliest surviving subject with the same label when both boxes
    overlap with ``iou >= iou_merge_threshold`` or when either of them has
    no box (only the first subject of each caption is boxed).
    """
    if captions:
        frame_index = captions[0].frame_index if frame_index is None else frame_index
        timestamp_s = captions[0].timestamp_s if timestamp_s is None else timestamp_s
        if any(c.frame_index != frame_index for c in captions):
            raise ValidationError("build_frame_graph: captions span several frames")
    graph = SceneGraph(frame_index or 0, timestamp_s or 0.0)
    for cap in captions:
        if cap.confidence < min_confidence:
            continue
        _union_into(graph, parse_caption(cap.text, cap.bbox, lexicon=lexicon))

    subjects = [nid for nid in sorted(graph.nodes) if graph.nodes[nid].kind is NodeKind.SUBJECT]
    alive: list[int] = []
    for nid in subjects:
        node = graph.nodes[nid]
        target = None
        for kid in alive:
            other = graph.nodes[kid]
            if other.label != node.label:
                continue
            # A mention without a box carries no evidence of being a second
            # instance, so it is identified with the earliest same-class subject.
            if node.bbox is None or other.bbox is None or iou(other.bbox, node.bbox) >= iou_merge_threshold:
                target = kid
                break
        if target is None:
            alive.append(nid)
        else:
            if graph.nodes[target].bbox is None and node.bbox is not None:
                graph.nodes[target] = replace(graph.nodes[target], bbox=node.bbox)
            _merge_subject(graph, target, nid)
    return graph


def build_video_graphs(
    video: VideoCaptions,
    min_confidence: float = 0.0,
    iou_merge_threshold: float = 0.5,
    lexicon: Mapping[str, str] | None = None,
) -> list[SceneGraph]:
    return [
        build_frame_graph(
            f.captions,
            min_confidence,
            iou_merge_threshold,
            frame_index=f.frame_index,
            timestamp_s=f.timestamp_s,
            lexicon=lexicon,
        )
        for f in video.frames
    ]


# -- external captioning service -------------------------------------------


@dataclass(frozen=True)
class EndpointConfig:
    url: str | None = None
    api_key: str | None = None
    provider: str = "deepai"
    timeout_s: float = 60.0

    @classmethod
    def from_env(cls, url: str | None = None, provider: str = "deepai", env: Mapping[str, str] | None = None) -> EndpointConfig:
        env = os.environ if env is None else env
        return cls(url or env.get(ENV_URL), env.get(ENV_KEY), provider)


def _map_deepai(payload: Any) -> list[dict[str, Any]]:
    # {"output": {"captions": [{"caption": str, "bounding_box": [x,y,w,h], "confidence": float}]}}
    try:
        caps = payload["output"]["captions"]
    except (KeyError, TypeError):
        raise CaptionResponseError("response lacks output.captions") from None
    if not isinstance(caps, list):
        raise CaptionResponseError("output.captions is not a list")
    return [{"text": c.get("caption"), "bbox": c.get("bounding_box"), "confidence": c.get("confidence")} for c in caps]


def _map_plain(payload: Any) -> list[dict[str, Any]]:
    # {"captions": [{"text": str, "bbox": [x,y,w,h], "confidence": float}]}
    caps = payload.get("captions") if isinstance(payload, dict) else None
    if not isinstance(caps, list):
        raise CaptionResponseError("response lacks a captions list")
    return caps


PROVIDERS: dict[str, tuple[str, Callable[[Any], list[dict[str, Any]]]]] = {
    # provider -> (credential header, response mapper)
    "deepai": ("api-key", _map_deepai),
    "plain": ("Authorization", _map_plain),
}


def fetch_captions(
    image: str | Path | bytes,
    config: EndpointConfig,
    frame_index: int = 0,
    timestamp_s: float = 0.0,
    session: Any = None,
) -> list[CaptionRecord]:
    """Send one image to the captioning service and map the reply to records."""
    if not config.url:
        raise ConfigurationError(f"no captioning endpoint configured (--captions-endpoint or {ENV_URL})")
    if not config.api_key:
        raise ConfigurationError(f"no captioning credential configured ({ENV_KEY})")
    if config.provider not in PROVIDERS:
        raise ConfigurationError(f"unknown captioning provider {config.provider!r}")
    header, mapper = PROVIDERS[config.provider]
    if isinstance(image, bytes):
        data = image
    elif Path(image).is_file():
        data = Path(image).read_bytes()
    else:
        raise NotFoundError(f"image not found: {image}")

    import requests

    http = session or requests
    try:
        resp = http.post(
            config.url,
            headers={header: config.api_key},
            files={"image": ("frame.jpg", data)},
            timeout=config.timeout_s,
        )
    except requests.RequestException as exc:
        raise CaptionNetworkError(f"captioning request failed: {exc}") from exc
    if resp.status_code in (401, 403):
        raise CaptionAuthError(f"captioning service rejected the credential (HTTP {resp.status_code})")
    if not 200 <= resp.status_code < 300:
        raise CaptionHTTPError(resp.status_code, (resp.text or "")[:200])
    try:
        payload = resp.json()
    except ValueError:
        raise CaptionResponseError("captioning response is not JSON") from None

    records = []
    for i, raw in enumerate(mapper(payload)):
        try:
            records.append(
                CaptionRecord(
                    str(raw["text"]),
                    BoundingBox.from_list(raw["bbox"]),
                    float(raw["confidence"]),
                    frame_index,
                    timestamp_s,
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CaptionResponseError(f"caption {i} is malformed: {exc}") from None
    return records
