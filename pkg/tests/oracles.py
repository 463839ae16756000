"""Slow, obviously-correct reference implementations used as test oracles."""

from __future__ import annotations

import itertools
import math

from sgvq.graph import NodeKind, SceneGraph

_RANK = {NodeKind.ATTRIBUTE: 0, NodeKind.RELATIONSHIP: 1, NodeKind.SUBJECT: 2}


def _key(g: SceneGraph, nid: int) -> tuple[int, str]:
    n = g.nodes[nid]
    return (_RANK[n.kind], n.label)


def brute_force_mcs(g1: SceneGraph, g2: SceneGraph) -> tuple[int, tuple | None]:
    """Size of the maximum common induced subgraph and the canonical tie key.

    Enumerates every subset of ``g1`` and every label-preserving injection
    of it into ``g2``; a mapping counts when adjacency (both directions)
    between mapped nodes agrees exactly.
    """
    ids1 = sorted(g1.nodes)
    ids2 = sorted(g2.nodes)
    best_size, best_key = 0, None
    for size in range(len(ids1), -1, -1):
        for subset in itertools.combinations(ids1, size):
            for image in itertools.permutations(ids2, size):
                if any(_key(g1, a) != _key(g2, b) for a, b in zip(subset, image)):
                    continue
                pairs = list(zip(subset, image))
                if all(
                    ((a, c) in g1.edges) == ((b, d) in g2.edges)
                    for (a, b), (c, d) in itertools.permutations(pairs, 2)
                ):
                    chosen = set(subset)
                    key = (
                        tuple(sorted(_key(g1, a) for a in subset)),
                        tuple(sorted((_key(g1, s), _key(g1, d)) for (s, d) in g1.edges if s in chosen and d in chosen)),
                    )
                    if best_key is None or size > best_size or key < best_key:
                        best_size, best_key = size, key
        if best_key is not None and best_size == size:
            return best_size, best_key
    return 0, ((), ())


def brute_force_mcs_sim(g1: SceneGraph, g2: SceneGraph) -> float:
    n1, n2 = len(g1.nodes), len(g2.nodes)
    if n1 == 0 and n2 == 0:
        return 1.0
    common, _ = brute_force_mcs(g1, g2)
    return common / (n1 + n2 - common)


def reference_spectral(g1: SceneGraph, g2: SceneGraph) -> float:
    """Plain-Python Frobenius score over the union of (kind, label) keys."""
    keys = sorted({_key(g1, i) for i in g1.nodes} | {_key(g2, i) for i in g2.nodes})
    n = len(keys)
    if n == 0:
        return 1.0
    e1 = {(_key(g1, s), _key(g1, d)) for s, d in g1.edges}
    e2 = {(_key(g2, s), _key(g2, d)) for s, d in g2.edges}
    diff = len(e1 ^ e2)
    return min(1.0, max(0.0, 1.0 - math.sqrt(diff) / n))


def mcs_tie_key(g: SceneGraph) -> tuple:
    return (
        tuple(sorted(_key(g, i) for i in g.nodes)),
        tuple(sorted((_key(g, s), _key(g, d)) for s, d in g.edges)),
    )


def first_occurrence(frames, subject: str, relation: str, obj: str) -> float | None:
    """Timestamp of the first frame whose own graph holds subject->relation->object."""
    for f in frames:
        for (s, r) in f.edges:
            ns, nr = f.nodes[s], f.nodes[r]
            if ns.kind is not NodeKind.SUBJECT or ns.label != subject or nr.kind is not NodeKind.RELATIONSHIP:
                continue
            if not (nr.label == relation or nr.label.startswith(relation + " ")):
                continue
            if any((r, o) in f.edges and f.nodes[o].label == obj and f.nodes[o].kind is NodeKind.SUBJECT for o in f.nodes):
                return f.timestamp_s
    return None


def temporal_oracle(frames, p1: tuple[str, str, str], p2: tuple[str, str, str], order: str) -> bool:
    t1, t2 = first_occurrence(frames, *p1), first_occurrence(frames, *p2)
    if t1 is None or t2 is None:
        return False
    return t1 < t2 if order == "before" else t1 > t2
