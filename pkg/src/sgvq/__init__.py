"""Scene graphs from video captions: similarity, aggregation and question answering."""

from .aggregation import (
    AggregationParams,
    KeyframeParams,
    aggregate_bag_of_nodes,
    aggregate_keyframes,
    aggregate_nodesim,
    build_vocabs,
    one_hot,
    select_keyframes,
    video_sim_matrix,
)
from .graph import (
    AdjacencyMatrix,
    AggregatedGraph,
    BoundingBox,
    Edge,
    Node,
    NodeKind,
    SceneGraph,
    Vocabulary,
    degree_stats,
    deserialize,
    serialize,
    to_adjacency,
)
from .ingest import CaptionRecord, VideoCaptions, build_frame_graph, fetch_captions, load_captions
from .parser import lemmatize_verb, parse_caption, tag_tokens
from .query import (
    Answer,
    Annotation,
    Query,
    QueryKind,
    QueryPattern,
    answer,
    exec_contextual,
    exec_temporal,
    exec_yesno,
    parse_question,
    score_answers,
)
from .similarity import McsBudget, Measure, SimilaritySeries, frame_sim_series, iou, mcs, mcs_sim, node_sim, spectral_sim

__version__ = "0.1.0"
