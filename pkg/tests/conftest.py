from __future__ import annotations

import random
from pathlib import Path

import pytest
from hypothesis import strategies as st

from sgvq.graph import ALLOWED_EDGES, AggregatedGraph, NodeKind, SceneGraph

FIXTURES = Path(__file__).parent / "fixtures"

SUBJECTS = ["man", "woman", "dog", "cat"]
RELATIONS = ["wear", "hold", "sit on", "play with"]
ATTRIBUTES = ["tall", "red", "brown", "fluffy"]
LABELS = {NodeKind.SUBJECT: SUBJECTS, NodeKind.RELATIONSHIP: RELATIONS, NodeKind.ATTRIBUTE: ATTRIBUTES}


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


def random_graph(
    rng: random.Random, max_nodes: int = 5, edge_p: float = 0.5, labels_per_kind: int = 2, min_nodes: int = 0
) -> SceneGraph:
    """Random valid tripartite graph; small label pools force repeated keys."""
    g = SceneGraph()
    for _ in range(rng.randint(min_nodes, max_nodes)):
        kind = rng.choice(list(NodeKind))
        g.add_node(kind, rng.choice(LABELS[kind][:labels_per_kind]))
    ids = sorted(g.nodes)
    for s in ids:
        for d in ids:
            if s != d and (g.nodes[s].kind, g.nodes[d].kind) in ALLOWED_EDGES and rng.random() < edge_p:
                g.add_edge(s, d)
    return g


@st.composite
def scene_graphs(draw, max_nodes: int = 6) -> SceneGraph:
    g = SceneGraph()
    n = draw(st.integers(0, max_nodes))
    for _ in range(n):
        kind = draw(st.sampled_from(list(NodeKind)))
        g.add_node(kind, draw(st.sampled_from(LABELS[kind][:3])))
    ids = sorted(g.nodes)
    pairs = [(s, d) for s in ids for d in ids if s != d and (g.nodes[s].kind, g.nodes[d].kind) in ALLOWED_EDGES]
    for s, d in pairs:
        if draw(st.booleans()):
            g.add_edge(s, d)
    return g


def random_aggregate(rng: random.Random, max_subjects: int = 6, max_rels: int = 4) -> AggregatedGraph:
    """Random aggregate with timestamped S->R->S chains and attributes."""
    g = AggregatedGraph()
    subs = [g.add_node(NodeKind.SUBJECT, rng.choice(SUBJECTS)) for _ in range(rng.randint(0, max_subjects))]
    rels = [g.add_node(NodeKind.RELATIONSHIP, rng.choice(RELATIONS)) for _ in range(rng.randint(0, max_rels))]
    for r in rels:
        for s in subs:
            if rng.random() < 0.3:
                g.add_edge(s, r, float(rng.randint(0, 9)))
            if rng.random() < 0.3:
                g.add_edge(r, s, float(rng.randint(0, 9)))
    for s in subs:
        if rng.random() < 0.5:
            g.add_edge(s, g.add_node(NodeKind.ATTRIBUTE, rng.choice(ATTRIBUTES)), float(rng.randint(0, 9)))
    g.refresh_vocabs()
    return g


# Acceptance results, filled by tests/test_acceptance.py and echoed at the end of the run.
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
