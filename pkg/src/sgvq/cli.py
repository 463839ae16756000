"""Command-line front end.

Stages hand off through files under ``--out``::

    OUT/<video_id>/frames/frame_000000.json   ingest
    OUT/<video_id>/ingest_summary.json        ingest
    OUT/<video_id>/framesim_<measure>.csv     framesim (+ .json summary)
    OUT/<video_id>/keyframes.json             keyframes
    OUT/<video_id>/aggregate_<method>.json    aggregate
    OUT/<video_id>/degree.csv, stats.json     stats
    OUT/videosim_<measure>.csv (+ .json)      videosim

Exit codes: 0 ok, 1 runtime, 2 input validation, 3 configuration, 4 network.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from .aggregation import (
    AggregationParams,
    KeyframeParams,
    aggregate_bag_of_nodes,
    aggregate_keyframes,
    aggregate_nodesim,
    select_keyframes,
    video_sim_matrix,
)
from .errors import (
    CaptionServiceError,
    ConfigurationError,
    NotFoundError,
    QueryParseError,
    SgvqError,
    ValidationError,
)
from .graph import SceneGraph, degree_stats, deserialize, serialize
from .ingest import EndpointConfig, FrameCaptions, VideoCaptions, build_video_graphs, fetch_captions, load_captions
from .lexicon import load_lexicon_file
from .query import Answer, QueryEngine, is_correct, load_annotations, score_answers
from .similarity import McsBudget, Measure, SimilaritySeries, frame_sim_series

logger = logging.getLogger("sgvq")

EXIT_OK, EXIT_RUNTIME, EXIT_INPUT, EXIT_CONFIG, EXIT_NETWORK = 0, 1, 2, 3, 4


class PrerequisiteError(ValidationError):
    pass


@dataclass(frozen=True)
class RunConfig:
    out: Path = Path("sgvq_out")
    measure: Measure = Measure.SPECTRAL
    budget: McsBudget = McsBudget()
    agg: AggregationParams = AggregationParams()
    keyframes: KeyframeParams = KeyframeParams(k=5)
    min_confidence: float = 0.0
    iou: float = 0.5
    lexicon: dict[str, str] | None = None
    endpoint: EndpointConfig = EndpointConfig()

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        if args.k is not None and args.theta is not None:
            raise ConfigurationError("--k and --theta are mutually exclusive")
        if not 0.0 <= args.min_confidence <= 1.0:
            raise ConfigurationError("--min-confidence must lie in [0, 1]")
        if not 0.0 <= args.iou <= 1.0:
            raise ConfigurationError("--iou must lie in [0, 1]")
        try:
            kf = KeyframeParams(theta=args.theta) if args.theta is not None else KeyframeParams(k=args.k or 5)
            agg = AggregationParams(args.m, args.threshold)
            budget = McsBudget(args.mcs_max_nodes, args.mcs_time_limit_ms)
        except ValidationError as exc:
            raise ConfigurationError(str(exc)) from None
        lexicon = None
        if args.lexicon:
            try:
                lexicon = load_lexicon_file(args.lexicon)
            except (OSError, ValueError) as exc:
                raise ConfigurationError(f"cannot load lexicon: {exc}") from None
        endpoint = EndpointConfig.from_env(getattr(args, "captions_endpoint", None), getattr(args, "provider", "deepai"))
        return cls(Path(args.out), Measure(args.measure), budget, agg, kf, args.min_confidence, args.iou, lexicon, endpoint)


# -- file helpers -------------------------------------------------------------


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _write_json(path: Path, payload: Any) -> None:
    _write(path, json.dumps(payload, indent=2) + "\n")


def _video_dirs(cfg: RunConfig, video: str | None) -> list[Path]:
    if video:
        d = cfg.out / video
        if not (d / "frames").is_dir():
            raise PrerequisiteError(f"no frames for video {video!r} under {cfg.out}; run 'ingest' first")
        return [d]
    dirs = sorted(p for p in cfg.out.glob("*") if (p / "frames").is_dir()) if cfg.out.is_dir() else []
    if not dirs:
        raise PrerequisiteError(f"no ingested videos under {cfg.out}; run 'ingest' first")
    return dirs


def _load_frames(vdir: Path) -> list[SceneGraph]:
    return [deserialize(p.read_text(encoding="utf-8")) for p in sorted((vdir / "frames").glob("frame_*.json"))]


def _series_path(vdir: Path, measure: Measure) -> Path:
    return vdir / f"framesim_{measure.value}.csv"


def _load_series(vdir: Path, measure: Measure) -> SimilaritySeries:
    path = _series_path(vdir, measure)
    if not path.is_file():
        raise PrerequisiteError(f"{path.name} missing for {vdir.name}; run 'framesim --measure {measure.value}' first")
    return SimilaritySeries.from_csv(path.read_text(encoding="utf-8"), vdir.name, measure)


def _load_aggregate(path: str | Path) -> SceneGraph:
    path = Path(path)
    if not path.is_file():
        raise PrerequisiteError(f"aggregate file {path} not found; run 'aggregate' first")
    return deserialize(path.read_text(encoding="utf-8"))


# -- commands ---------------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace, cfg: RunConfig) -> int:
    for captions_path in args.captions:
        video = load_captions(captions_path)
        graphs = build_video_graphs(video, cfg.min_confidence, cfg.iou, cfg.lexicon)
        vdir = cfg.out / video.video_id
        for old in sorted((vdir / "frames").glob("frame_*.json")) if (vdir / "frames").is_dir() else []:
            old.unlink()
        for g in graphs:
            _write(vdir / "frames" / f"frame_{g.frame_index:06d}.json", serialize(g))
        summary = {
            "video_id": video.video_id,
            "frames": len(graphs),
            "nodes": sum(len(g.nodes) for g in graphs),
            "edges": sum(len(g.edges) for g in graphs),
            "per_frame": [
                {"frame_index": g.frame_index, "timestamp_s": g.timestamp_s, "nodes": len(g.nodes), "edges": len(g.edges)}
                for g in graphs
            ],
        }
        _write_json(vdir / "ingest_summary.json", summary)
        print(f"{video.video_id}: {summary['frames']} frames, {summary['nodes']} nodes, {summary['edges']} edges")
    return EXIT_OK


def cmd_fetch_captions(args: argparse.Namespace, cfg: RunConfig) -> int:
    frames = []
    for i, image in enumerate(args.images):
        t = round(i * args.interval, 6)
        records = fetch_captions(image, cfg.endpoint, frame_index=i, timestamp_s=t)
        frames.append(FrameCaptions(i, t, records))
    video = VideoCaptions(args.video_id, frames)
    _write_json(Path(args.output), video.to_dict())
    print(f"wrote {len(frames)} frames to {args.output}")
    return EXIT_OK


def cmd_framesim(args: argparse.Namespace, cfg: RunConfig) -> int:
    for vdir in _video_dirs(cfg, args.video):
        frames = _load_frames(vdir)
        series = frame_sim_series(frames, cfg.measure, cfg.budget, vdir.name)
        if len(frames) < 2:
            logger.warning("%s has %d frame(s); similarity series is empty", vdir.name, len(frames))
        _write(_series_path(vdir, cfg.measure), series.to_csv())
        summary = {
            "video_id": vdir.name,
            "measure": cfg.measure.value,
            "boundaries": len(series),
            "mean_similarity": series.mean,
            "fallback_boundaries": series.fallback,
        }
        _write_json(vdir / f"framesim_{cfg.measure.value}.json", summary)
        mean = "n/a" if series.mean is None else f"{series.mean:.4f}"
        print(f"{vdir.name}: {len(series)} boundaries, mean {cfg.measure.value} similarity {mean}")
    return EXIT_OK


def cmd_keyframes(args: argparse.Namespace, cfg: RunConfig) -> int:
    for vdir in _video_dirs(cfg, args.video):
        series = _load_series(vdir, cfg.measure)
        frames = sorted((vdir / "frames").glob("frame_*.json"))
        positions = select_keyframes(series, cfg.keyframes)
        kp = cfg.keyframes
        payload = {
            "video_id": vdir.name,
            "measure": cfg.measure.value,
            "mode": "count" if kp.k is not None else "threshold",
            "k": kp.k,
            "theta": kp.theta,
            "saturated": kp.k is not None and kp.k > len(series),
            "positions": positions,
            "frame_indices": [int(frames[p].stem.split("_")[1]) for p in positions if p < len(frames)],
        }
        _write_json(vdir / "keyframes.json", payload)
        print(f"{vdir.name}: key frames at positions {positions}")
    return EXIT_OK


def cmd_aggregate(args: argparse.Namespace, cfg: RunConfig) -> int:
    for vdir in _video_dirs(cfg, args.video):
        frames = _load_frames(vdir)
        if args.method == "nodesim":
            agg = aggregate_nodesim(frames, cfg.agg)
        elif args.method == "bag":
            agg = aggregate_bag_of_nodes(frames)
        else:
            agg = aggregate_keyframes(frames, _load_series(vdir, cfg.measure), cfg.keyframes, cfg.agg)
        _write(vdir / f"aggregate_{args.method}.json", serialize(agg))
        print(f"{vdir.name}: {args.method} aggregate with {len(agg.nodes)} nodes, {len(agg.edges)} edges")
    return EXIT_OK


def cmd_videosim(args: argparse.Namespace, cfg: RunConfig) -> int:
    dirs = _video_dirs(cfg, None)
    aggregates = [aggregate_bag_of_nodes(_load_frames(d)) for d in dirs]
    matrix = video_sim_matrix(aggregates, cfg.measure, cfg.budget, [d.name for d in dirs])
    _write(cfg.out / f"videosim_{cfg.measure.value}.csv", matrix.to_csv())
    _write_json(
        cfg.out / f"videosim_{cfg.measure.value}.json",
        {
            "measure": cfg.measure.value,
            "video_ids": matrix.video_ids,
            "fallback_cells": [list(c) for c in sorted(matrix.fallback)],
        },
    )
    print(matrix.to_csv(), end="")
    return EXIT_OK


def cmd_stats(args: argparse.Namespace, cfg: RunConfig) -> int:
    for vdir in _video_dirs(cfg, args.video):
        agg = aggregate_bag_of_nodes(_load_frames(vdir))
        hist = degree_stats(agg)
        _write(vdir / "degree.csv", "degree,count\n" + "".join(f"{d},{c}\n" for d, c in hist))
        _write_json(vdir / "stats.json", {"video_id": vdir.name, "nodes": len(agg.nodes), "edges": len(agg.edges)})
        print(f"{vdir.name}: bag-of-nodes graph {len(agg.nodes)} nodes, {len(agg.edges)} edges")
    return EXIT_OK


def _answer_line(engine: QueryEngine, question: str, cfg: RunConfig) -> dict[str, Any]:
    ans = engine.answer(question, cfg.lexicon)
    return {"question": question, "kind": ans.kind.value, "answer": ans.to_json()}


def cmd_query(args: argparse.Namespace, cfg: RunConfig) -> int:
    engine = QueryEngine(_load_aggregate(args.aggregate))
    if not args.repl:
        if not args.question:
            raise ConfigurationError("give a question or --repl")
        print(json.dumps(_answer_line(engine, args.question, cfg)))
        return EXIT_OK
    interactive = sys.stdin.isatty()
    while True:
        if interactive:
            print("? ", end="", file=sys.stderr, flush=True)
        line = sys.stdin.readline()
        if not line:
            break
        question = line.strip()
        if not question:
            continue
        try:
            print(json.dumps(_answer_line(engine, question, cfg)), flush=True)
        except QueryParseError as exc:
            print(json.dumps({"question": question, "error": str(exc)}), flush=True)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace, cfg: RunConfig) -> int:
    engine = QueryEngine(_load_aggregate(args.aggregate))
    annotations = load_annotations(args.annotations)
    answers, rows = [], []
    for ann in annotations:
        try:
            ans = engine.answer(ann.question, cfg.lexicon)
        except QueryParseError as exc:
            logger.warning("cannot parse %r: %s", ann.question, exc)
            ans = None
        answers.append(ans)
    # Unparseable questions score as wrong answers.
    scored = [a if a is not None else Answer(ann.kind, ()) for a, ann in zip(answers, annotations)]
    report = score_answers(scored, annotations)
    for a, ann in zip(answers, annotations):
        rows.append(
            {
                "question": ann.question,
                "kind": ann.kind.value,
                "answer": None if a is None else a.to_json(),
                "correct": a is not None and is_correct(a, ann),
            }
        )
    payload = {"accuracy": report.accuracy, "counts": {k: list(v) for k, v in report.counts.items()}, "questions": rows}
    _write_json(cfg.out / "eval_report.json", payload)
    print(report.table())
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser, defaults: bool) -> None:
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p.add_argument("--out", default=d("sgvq_out"), help="stage directory (default: sgvq_out)")
    p.add_argument("--measure", choices=[m.value for m in Measure], default=d("spectral"))
    p.add_argument("--k", type=int, default=d(None), help="key frames by count (default 5)")
    p.add_argument("--theta", type=float, default=d(None), help="key frames by similarity threshold")
    p.add_argument("--m", type=int, default=d(5), help="NodeSim lookback in frames (default 5)")
    p.add_argument("--threshold", type=float, default=d(0.5), help="NodeSim merge threshold (default 0.5)")
    p.add_argument("--min-confidence", type=float, default=d(0.0), help="drop captions below this (default 0)")
    p.add_argument("--iou", type=float, default=d(0.5), help="same-frame subject merge IoU (default 0.5)")
    p.add_argument("--mcs-max-nodes", type=int, default=d(30))
    p.add_argument("--mcs-time-limit-ms", type=float, default=d(5000.0))
    p.add_argument("--lexicon", default=d(None), help="word<TAB>TAG file extending the built-in lexicon")
    p.add_argument("-v", "--verbose", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sgvq", description="Scene graphs from video captions: similarity, aggregation, QA.")
    _add_common(parser, defaults=True)
    common = _Parser(add_help=False)
    _add_common(common, defaults=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", parents=[common], help="captions JSON -> per-frame scene graphs")
    p.add_argument("captions", nargs="+")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("fetch-captions", parents=[common], help="caption images via an external service")
    p.add_argument("images", nargs="+")
    p.add_argument("--captions-endpoint", default=None)
    p.add_argument("--provider", default="deepai")
    p.add_argument("--video-id", required=True)
    p.add_argument("--interval", type=float, default=0.5, help="seconds between images (default 0.5)")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_fetch_captions)

    for name, func, text in (
        ("framesim", cmd_framesim, "similarity between consecutive frames"),
        ("keyframes", cmd_keyframes, "select key frames from the similarity series"),
        ("stats", cmd_stats, "degree distribution of the bag-of-nodes graph"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--video", default=None)
        p.set_defaults(func=func)

    p = sub.add_parser("aggregate", parents=[common], help="build a video-level graph")
    p.add_argument("--method", choices=["nodesim", "bag", "keyframe"], default="nodesim")
    p.add_argument("--video", default=None)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("videosim", parents=[common], help="pairwise similarity of all ingested videos")
    p.set_defaults(func=cmd_videosim)

    p = sub.add_parser("query", parents=[common], help="answer questions against an aggregate")
    p.add_argument("aggregate")
    p.add_argument("question", nargs="?")
    p.add_argument("--repl", action="store_true")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("eval", parents=[common], help="one-zero accuracy against annotations")
    p.add_argument("aggregate")
    p.add_argument("annotations")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = RunConfig.from_args(args)
        return args.func(args, cfg)
    except ConfigurationError as exc:
        print(f"sgvq: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CaptionServiceError as exc:
        print(f"sgvq: network error: {exc}", file=sys.stderr)
        return EXIT_NETWORK
    except (ValidationError, NotFoundError) as exc:
        print(f"sgvq: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SgvqError, OSError) as exc:
        print(f"sgvq: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
