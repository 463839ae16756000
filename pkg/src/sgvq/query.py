"""Question parsing and graph queries over an aggregated video graph."""

from __future__ import annotations

import enum
import json
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence, Union

from .errors import NotFoundError, QueryParseError, ValidationError
from .graph import NodeKind, SceneGraph
from .lexicon import DEFAULT_LEXICON
from .parser import LOCATIVE_PREPS, _chunk, _fold_preps, tag_tokens

ANY_RELATION = "*"


class QueryKind(str, enum.Enum):
    YESNO = "yesno"
    CONTEXTUAL = "contextual"
    TEMPORAL = "temporal"


class Order(str, enum.Enum):
    BEFORE = "before"
    AFTER = "after"


@dataclass(frozen=True)
class QueryPattern:
    """subject -> relation -> object; ``object=None`` is the slot being asked for.

    ``locative`` restricts matches to relations ending in a place
    preposition ("in", "sit on", ...); ``relation=ANY_RELATION`` accepts
    any relation label.
    """

    subject: str
    relation: str
    object: str | None = None
    locative: bool = False

    def __post_init__(self) -> None:
        if not self.subject or not self.relation:
            raise ValidationError("query pattern needs a subject and a relation")

    def without_object(self) -> QueryPattern:
        return QueryPattern(self.subject, self.relation, None, self.locative)


@dataclass(frozen=True)
class Query:
    kind: QueryKind
    pattern1: QueryPattern
    pattern2: QueryPattern | None = None
    order: Order | None = None

    def __post_init__(self) -> None:
        temporal = self.kind is QueryKind.TEMPORAL
        if temporal != (self.pattern2 is not None) or temporal != (self.order is not None):
            raise ValidationError("pattern2 and order are required for, and only for, temporal queries")


@dataclass(frozen=True)
class Answer:
    kind: QueryKind
    value: Union[bool, tuple[str, ...]]

    @classmethod
    def labels(cls, labels: Sequence[str]) -> Answer:
        return cls(QueryKind.CONTEXTUAL, tuple(sorted(set(labels))))

    def to_json(self) -> Any:
        return list(self.value) if isinstance(self.value, tuple) else self.value


@dataclass(frozen=True)
class Annotation:
    question: str
    expected: Union[bool, tuple[str, ...]]
    kind: QueryKind

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Annotation:
        if not isinstance(data, Mapping):
            raise ValidationError("annotation must be an object")
        unknown = set(data) - {"question", "expected", "kind"}
        if unknown:
            raise ValidationError(f"annotation has unknown field {sorted(unknown)[0]!r}")
        question, expected, kind = data.get("question"), data.get("expected"), data.get("kind")
        if not isinstance(question, str) or not question.strip():
            raise ValidationError("annotation.question must be a non-empty string")
        try:
            qkind = QueryKind(kind)
        except ValueError:
            raise ValidationError(f"annotation.kind must be one of yesno|contextual|temporal, got {kind!r}") from None
        if isinstance(expected, str):
            word = expected.strip().lower()
            if word not in ("yes", "no", "true", "false"):
                raise ValidationError(f"annotation.expected string must be yes/no/true/false, got {expected!r}")
            value: Union[bool, tuple[str, ...]] = word in ("yes", "true")
        elif isinstance(expected, list) and expected and all(isinstance(x, str) for x in expected):
            value = tuple(sorted({x.strip().lower() for x in expected}))
        else:
            raise ValidationError("annotation.expected must be a non-empty list of labels or yes/no/true/false")
        return cls(question, value, qkind)


def load_annotations(path: str | Path) -> list[Annotation]:
    path = Path(path)
    if not path.is_file():
        raise NotFoundError(f"annotations file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, list):
        raise ValidationError("annotations file must hold a JSON list")
    return [Annotation.from_dict(d) for d in data]


# -- question parsing ------------------------------------------------------

_WH = ("what", "where", "who")
_YESNO_LEAD = ("is", "are", "was", "were", "does", "do", "did", "has", "have", "can")


def _clause_pattern(words: list[str], want_object: bool, lexicon: Mapping[str, str]) -> tuple[str, str | None, str | None]:
    chunks = _chunk(tag_tokens(" ".join(words), lexicon), lexicon)
    subject = relation = obj = None
    i = 0
    while i < len(chunks):
        ch = chunks[i]
        if ch.kind == "NP":
            if subject is None:
                subject = ch.text
            elif relation is not None and want_object and obj is None:
                obj = ch.text
        elif ch.kind == "VERB" and subject is not None and relation is None:
            preps, j = _fold_preps(chunks, i + 1)
            relation = " ".join([ch.text, *preps])
            i = j
            continue
        elif ch.kind == "PREP" and subject is not None and relation is None:
            relation = ch.text
        i += 1
    return subject, relation, obj


def parse_question(text: str, lexicon: Mapping[str, str] | None = None) -> Query:
    lex = DEFAULT_LEXICON if lexicon is None else lexicon
    words = [t.text for t in tag_tokens(text, lex)]
    if not words:
        raise QueryParseError("empty question")

    split = next((i for i, w in enumerate(words) if w in ("before", "after")), None)
    if split is not None:
        p1 = _clause_pattern(words[:split], True, lex)
        p2 = _clause_pattern(words[split + 1:], True, lex)
        for side, (s, r, o) in (("first", p1), ("second", p2)):
            if s is None or r is None or o is None:
                raise QueryParseError(f"temporal question: no subject-relation-object in the {side} clause of {text!r}")
        return Query(QueryKind.TEMPORAL, QueryPattern(*p1), QueryPattern(*p2), Order(words[split]))

    lead = words[0]
    if lead in _WH:
        subject, relation, _ = _clause_pattern(words[1:], False, lex)
        if subject is None:
            raise QueryParseError(f"no subject found in {text!r}")
        if lead == "where":
            return Query(QueryKind.CONTEXTUAL, QueryPattern(subject, relation or ANY_RELATION, None, locative=True))
        if relation is None:
            raise QueryParseError(f"no relation (verb or preposition) found in {text!r}")
        return Query(QueryKind.CONTEXTUAL, QueryPattern(subject, relation))
    if lead in _YESNO_LEAD:
        subject, relation, obj = _clause_pattern(words[1:], True, lex)
        if subject is None or relation is None:
            raise QueryParseError(f"no subject-relation pattern found in {text!r}")
        return Query(QueryKind.YESNO, QueryPattern(subject, relation, obj))
    raise QueryParseError(f"unsupported question form {text!r} (start with what/where/who or is/does/did)")


# -- execution ----------------------------------------------------------------


def relation_matches(label: str, pattern: QueryPattern) -> bool:
    if pattern.relation != ANY_RELATION and not (label == pattern.relation or label.startswith(pattern.relation + " ")):
        return False
    if pattern.locative:
        return any(label == p or label.endswith(" " + p) for p in LOCATIVE_PREPS)
    return True


class QueryEngine:
    """Read-only query index over one aggregated graph.

    Subject lookup by label is a dict access; a pattern match walks only
    the out-edges of matching subjects and relationships.
    """

    def __init__(self, graph: SceneGraph):
        self.graph = graph
        self.subjects: dict[str, list[int]] = defaultdict(list)
        self.out: dict[int, list[int]] = defaultdict(list)
        for nid in sorted(graph.nodes):
            node = graph.nodes[nid]
            if node.kind is NodeKind.SUBJECT:
                self.subjects[node.label].append(nid)
        for (s, d) in sorted(graph.edges):
            self.out[s].append(d)

    def chains(self, pattern: QueryPattern):
        """Yield (subject, relationship, object-or-None) node-id triples matching ``pattern``."""
        nodes = self.graph.nodes
        for s in self.subjects.get(pattern.subject, ()):
            for r in self.out[s]:
                rel = nodes[r]
                if rel.kind is not NodeKind.RELATIONSHIP or not relation_matches(rel.label, pattern):
                    continue
                targets = [o for o in self.out[r] if nodes[o].kind is NodeKind.SUBJECT]
                if pattern.object is None and not targets:
                    yield s, r, None
                for o in targets:
                    if pattern.object is None or nodes[o].label == pattern.object:
                        yield s, r, o

    def yesno(self, pattern: QueryPattern) -> bool:
        return next(iter(self.chains(pattern)), None) is not None

    def contextual(self, pattern: QueryPattern) -> list[str]:
        found = {self.graph.nodes[o].label for _, _, o in self.chains(pattern.without_object()) if o is not None}
        return sorted(found)

    def event_time(self, pattern: QueryPattern) -> float | None:
        """Earliest time the full subject->relation->object chain exists.

        Per chain this is the later of the two edges' first timestamps; the
        pattern's time is the minimum over matching chains.
        """
        best = None
        for s, r, o in self.chains(pattern):
            if o is None:
                continue
            t1 = self.graph.edges[(s, r)].timestamps
            t2 = self.graph.edges[(r, o)].timestamps
            if not t1 or not t2:
                continue
            t = max(t1[0], t2[0])
            if best is None or t < best:
                best = t
        return best

    def temporal(self, pattern1: QueryPattern, pattern2: QueryPattern, order: Order | str) -> bool:
        t1, t2 = self.event_time(pattern1), self.event_time(pattern2)
        if t1 is None or t2 is None:
            return False
        return t1 < t2 if Order(order) is Order.BEFORE else t1 > t2

    def run(self, query: Query) -> Answer:
        if query.kind is QueryKind.YESNO:
            return Answer(QueryKind.YESNO, self.yesno(query.pattern1))
        if query.kind is QueryKind.CONTEXTUAL:
            return Answer.labels(self.contextual(query.pattern1))
        return Answer(QueryKind.TEMPORAL, self.temporal(query.pattern1, query.pattern2, query.order))

    def answer(self, question: str, lexicon: Mapping[str, str] | None = None) -> Answer:
        return self.run(parse_question(question, lexicon))


def exec_yesno(aggregate: SceneGraph, pattern: QueryPattern) -> bool:
    return QueryEngine(aggregate).yesno(pattern)


def exec_contextual(aggregate: SceneGraph, pattern: QueryPattern) -> list[str]:
    return QueryEngine(aggregate).contextual(pattern)


def exec_temporal(aggregate: SceneGraph, pattern1: QueryPattern, pattern2: QueryPattern, order: Order | str) -> bool:
    return QueryEngine(aggregate).temporal(pattern1, pattern2, order)


def answer(aggregate: SceneGraph, question: str) -> Answer:
    return QueryEngine(aggregate).answer(question)


# -- evaluation -----------------------------------------------------------------


@dataclass
class AccuracyReport:
    counts: dict[str, tuple[int, int]]  # kind or "overall" -> (correct, total)

    @property
    def accuracy(self) -> dict[str, float]:
        return {k: c / t for k, (c, t) in self.counts.items()}

    def table(self) -> str:
        lines = [f"{'kind':<12}{'correct':>8}{'total':>7}{'accuracy':>10}"]
        for k, (c, t) in self.counts.items():
            lines.append(f"{k:<12}{c:>8}{t:>7}{c / t:>10.3f}")
        return "\n".join(lines)


def is_correct(ans: Answer, ann: Annotation) -> bool:
    if isinstance(ann.expected, bool):
        return isinstance(ans.value, bool) and ans.value == ann.expected
    return isinstance(ans.value, tuple) and tuple(sorted(set(ans.value))) == ann.expected


def score_answers(answers: Sequence[Answer], annotations: Sequence[Annotation]) -> AccuracyReport:
    """One-zero accuracy per query kind and overall."""
    if not annotations:
        raise ValidationError("no annotations to score against")
    if len(answers) != len(annotations):
        raise ValidationError(f"{len(answers)} answers for {len(annotations)} annotations")
    counts: dict[str, list[int]] = {}
    for ans, ann in zip(answers, annotations):
        ok = int(is_correct(ans, ann))
        for key in (ann.kind.value, "overall"):
            c = counts.setdefault(key, [0, 0])
            c[0] += ok
            c[1] += 1
    order = [k.value for k in QueryKind if k.value in counts] + ["overall"]
    return AccuracyReport({k: (counts[k][0], counts[k][1]) for k in order})
