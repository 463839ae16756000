"""Rule-based caption parser: sentence -> scene-graph fragment.

The parser is a small part-of-speech tagger (lexicon lookup, then suffix
heuristics, then a NOUN default) followed by a chunker and a left-to-right
pattern scanner.  Patterns, in the order they are tried at each chunk:

1. passive      ``X is VERBed by Y``          -> Y -> verb -> X
2. copular      ``X is ADJ`` / ``X is a N``   -> attribute on X
3. prepositional/possessive ``X with ADJ* N`` / ``X's N`` -> attribute on X
4. clausal      ``X that VERB ...``           -> X -> verb (object optional)
5. verb-object  ``X VERB PREP* Y``            -> X -> "verb prep" -> Y
6. locative     ``X PREP Y``                  -> X -> prep -> Y
7. adjectival   ``ADJ N``                     -> attribute on N (applied while chunking)
"""

from __future__ import annotations

import enum
import logging
import re
from dataclasses import dataclass, field
from typing import Mapping

from .graph import BoundingBox, NodeKind, SceneGraph
from .lexicon import (
    DEFAULT_LEXICON,
    IRREGULAR_VERBS,
    SILENT_E_STEMS,
    UNDOUBLE,
    VERB_BASES,
)

logger = logging.getLogger(__name__)


class Tag(str, enum.Enum):
    NOUN = "NOUN"
    VERB = "VERB"
    ADJ = "ADJ"
    PREP = "PREP"
    DET = "DET"
    COP = "COP"
    OTHER = "OTHER"


@dataclass(frozen=True)
class TaggedToken:
    text: str
    tag: Tag


_TOKEN_RE = re.compile(r"[a-z0-9]+(?:[-'][a-z0-9]+)*")

MULTIWORD_PREPS = (("in", "front", "of"), ("on", "top", "of"), ("next", "to"), ("close", "to"))

IRREGULAR_PLURALS = {
    "men": "man", "women": "woman", "people": "person", "children": "child", "feet": "foot",
    "teeth": "tooth", "mice": "mouse", "geese": "goose", "knives": "knife", "leaves": "leaf",
    "shelves": "shelf", "loaves": "loaf", "wolves": "wolf", "policemen": "policeman",
}

LOCATIVE_PREPS = frozenset(
    "on in at near under behind beside above below over inside outside between by".split()
    + [" ".join(p) for p in MULTIWORD_PREPS]
)


def _tokenize(sentence: str) -> list[str]:
    words: list[str] = []
    for word in _TOKEN_RE.findall(sentence.lower()):
        if word.endswith("'s") and len(word) > 2:
            words.extend((word[:-2], "'s"))
        else:
            words.append(word)
    merged: list[str] = []
    i = 0
    while i < len(words):
        for phrase in MULTIWORD_PREPS:
            if tuple(words[i:i + len(phrase)]) == phrase:
                merged.append(" ".join(phrase))
                i += len(phrase)
                break
        else:
            merged.append(words[i])
            i += 1
    return merged


def singular_noun(word: str) -> str:
    if word in IRREGULAR_PLURALS:
        return IRREGULAR_PLURALS[word]
    if len(word) > 4 and word.endswith("ies"):
        return word[:-3] + "y"
    if word.endswith(("sses", "xes", "zes", "ches", "shes")):
        return word[:-2]
    if len(word) > 3 and word.endswith("s") and not word.endswith(("ss", "us", "is")):
        return word[:-1]
    return word


def _strip(word: str, suffix: str) -> str:
    stem = word[: -len(suffix)]
    if len(stem) < 2:
        return word
    if suffix == "ed":
        if word.endswith("ied") and len(word) > 4:
            return word[:-3] + "y"
        if word.endswith("eed"):
            return word if len(word) <= 4 else word[:-1]
    if len(stem) >= 3 and stem[-1] == stem[-2] and stem[-1] in UNDOUBLE:
        return stem[:-1]
    if stem + "e" in SILENT_E_STEMS:
        return stem + "e"
    return stem


def lemmatize_verb(token: str) -> str:
    """Base form of a verb token; unknown shapes come back unchanged."""
    word = token.lower()
    if word in IRREGULAR_VERBS:
        return IRREGULAR_VERBS[word]
    if word in VERB_BASES:
        return word
    if word.endswith("ing") and len(word) > 4:
        return _strip(word, "ing")
    if word.endswith("ed") and len(word) > 3:
        return _strip(word, "ed")
    if len(word) > 4 and word.endswith("ies"):
        return word[:-3] + "y"
    if word.endswith(("sses", "ches", "shes", "xes", "zes", "oes")):
        return word[:-2]
    if len(word) > 3 and word.endswith("s") and not word.endswith(("ss", "us", "is")):
        return word[:-1]
    return word


def _tag_word(word: str, lexicon: Mapping[str, str]) -> Tag:
    if word in lexicon:
        return Tag(lexicon[word])
    if word == "'s":
        return Tag.OTHER
    if " " in word:
        return Tag.PREP
    if word.isdigit():
        return Tag.ADJ
    if lexicon.get(singular_noun(word)) == "NOUN":
        return Tag.NOUN
    lemma = lemmatize_verb(word)
    if lemma != word and lexicon.get(lemma) == "VERB":
        return Tag.VERB
    if word.endswith(("ing", "ed")):
        return Tag.VERB
    if word.endswith(("y", "ful", "ish")):
        return Tag.ADJ
    return Tag.NOUN


def tag_tokens(sentence: str, lexicon: Mapping[str, str] | None = None) -> list[TaggedToken]:
    lex = DEFAULT_LEXICON if lexicon is None else lexicon
    return [TaggedToken(w, _tag_word(w, lex)) for w in _tokenize(sentence)]


# -- chunking ------------------------------------------------------------


@dataclass
class _Chunk:
    kind: str  # NP VERB PREP COP ADJ AND REL POSS OTHER
    text: str = ""
    adjs: list[str] = field(default_factory=list)

    @property
    def phrase(self) -> str:
        return " ".join([*self.adjs, self.text])


def _noun_label(words: list[str], lexicon: Mapping[str, str]) -> str:
    head = words[-1]
    if head not in lexicon:
        head = singular_noun(head)
    return " ".join([*words[:-1], head])


def _chunk(tokens: list[TaggedToken], lexicon: Mapping[str, str]) -> list[_Chunk]:
    chunks: list[_Chunk] = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.tag in (Tag.DET, Tag.ADJ, Tag.NOUN):
            j = i
            while j < len(tokens) and tokens[j].tag is Tag.DET:
                j += 1
            adjs = []
            while j < len(tokens) and tokens[j].tag is Tag.ADJ:
                adjs.append(tokens[j].text)
                j += 1
            nouns = []
            while j < len(tokens) and tokens[j].tag is Tag.NOUN:
                nouns.append(tokens[j].text)
                j += 1
            if nouns:
                chunks.append(_Chunk("NP", _noun_label(nouns, lexicon), adjs))
            else:
                chunks.extend(_Chunk("ADJ", a) for a in adjs)
            i = max(j, i + 1)
            continue
        if tok.tag is Tag.VERB:
            chunks.append(_Chunk("VERB", lemmatize_verb(tok.text), [tok.text]))
        elif tok.tag is Tag.PREP:
            chunks.append(_Chunk("PREP", tok.text))
        elif tok.tag is Tag.COP:
            chunks.append(_Chunk("COP", tok.text))
        elif tok.text in ("and", "or"):
            chunks.append(_Chunk("AND", tok.text))
        elif tok.text in ("that", "who", "which"):
            chunks.append(_Chunk("REL", tok.text))
        elif tok.text == "'s":
            chunks.append(_Chunk("POSS", tok.text))
        else:
            chunks.append(_Chunk("OTHER", tok.text))
        i += 1
    return chunks


# -- pattern scanner -----------------------------------------------------


class _Builder:
    def __init__(self, bbox: BoundingBox | None):
        self.graph = SceneGraph()
        self.bbox = bbox
        self._attrs: dict[int, dict[str, int]] = {}

    def subject(self, np: _Chunk) -> int:
        bbox, self.bbox = self.bbox, None
        sid = self.graph.add_node(NodeKind.SUBJECT, np.text, bbox)
        for adj in np.adjs:
            self.attribute(sid, adj)
        return sid

    def attribute(self, sid: int, label: str) -> None:
        seen = self._attrs.setdefault(sid, {})
        if label in seen:
            return
        aid = self.graph.add_node(NodeKind.ATTRIBUTE, label)
        seen[label] = aid
        self.graph.add_edge(sid, aid)

    def relation(self, subjects: list[int], label: str) -> int:
        rid = self.graph.add_node(NodeKind.RELATIONSHIP, label)
        for sid in subjects:
            self.graph.add_edge(sid, rid)
        return rid


def _fold_preps(chunks: list[_Chunk], j: int, stop_at_by: bool = False) -> tuple[list[str], int]:
    preps = []
    while j < len(chunks) and chunks[j].kind == "PREP":
        if stop_at_by and chunks[j].text == "by":
            break
        preps.append(chunks[j].text)
        j += 1
    return preps, j


def _try_passive(chunks: list[_Chunk], i: int) -> tuple[str, _Chunk, int] | None:
    """Match ``COP+ VERBed PREP* by NP`` starting at the COP at ``i``."""
    j = i
    while j < len(chunks) and chunks[j].kind == "COP":
        j += 1
    if j >= len(chunks) or chunks[j].kind != "VERB" or chunks[j].adjs[0].endswith("ing"):
        return None
    verb = chunks[j].text
    preps, k = _fold_preps(chunks, j + 1, stop_at_by=True)
    if k + 1 < len(chunks) and chunks[k].kind == "PREP" and chunks[k].text == "by" and chunks[k + 1].kind == "NP":
        return " ".join([verb, *preps]), chunks[k + 1], k + 2
    return None


def parse_caption(
    sentence: str,
    bbox: BoundingBox | None = None,
    *,
    lexicon: Mapping[str, str] | None = None,
    notes: list[str] | None = None,
) -> SceneGraph:
    """Parse one caption into a scene-graph fragment.

    ``bbox`` is attached to the first subject emitted.  Never raises on
    text input; if nothing matches, the returned graph is empty and a
    diagnostic is appended to ``notes`` (when given).
    """
    lex = DEFAULT_LEXICON if lexicon is None else lexicon
    chunks = _chunk(tag_tokens(sentence, lex), lex)
    b = _Builder(bbox)
    diag: list[str] = []

    subj: list[int] = []
    last_np: int | None = None
    last_role: str | None = None
    pending: int | None = None  # relationship awaiting its object
    last_rel: int | None = None
    copular = False
    prev = ""

    i = 0
    while i < len(chunks):
        ch = chunks[i]
        kind = ch.kind
        if kind == "NP":
            if copular and pending is None and subj:
                for s in subj:
                    b.attribute(s, ch.phrase)
            else:
                nid = b.subject(ch)
                if pending is not None:
                    b.graph.add_edge(pending, nid)
                    last_rel, pending, last_role = pending, None, "obj"
                elif prev == "AND" and last_role == "obj" and last_rel is not None:
                    b.graph.add_edge(last_rel, nid)
                elif prev == "AND" and last_role == "subj":
                    subj.append(nid)
                else:
                    subj, last_role = [nid], "subj"
                last_np = nid
            copular = False
        elif kind == "VERB":
            preps, j = _fold_preps(chunks, i + 1)
            label = " ".join([ch.text, *preps])
            if prev == "REL" and last_np is not None:
                subj = [last_np]
            if subj:
                pending = last_rel = b.relation(subj, label)
            else:
                diag.append(f"verb {ch.adjs[0]!r} has no subject")
                pending = None
            copular = False
            prev = kind
            i = j
            continue
        elif kind == "COP":
            passive = _try_passive(chunks, i) if subj else None
            if passive is not None:
                label, agent_np, nxt = passive
                agent = b.subject(agent_np)
                rid = b.relation([agent], label)
                for s in subj:
                    b.graph.add_edge(rid, s)
                last_np, last_rel, pending = agent, rid, None
                prev, copular = "NP", False
                i = nxt
                continue
            copular = bool(subj)
        elif kind == "PREP":
            anchors = subj if copular else ([last_np] if last_np is not None else [])
            nxt = chunks[i + 1] if i + 1 < len(chunks) else None
            if ch.text == "with" and nxt is not None and nxt.kind == "NP" and anchors:
                i += 1
                while True:
                    for a in anchors:
                        b.attribute(a, chunks[i].phrase)
                    if i + 2 < len(chunks) and chunks[i + 1].kind == "AND" and chunks[i + 2].kind == "NP":
                        i += 2
                    else:
                        break
            elif nxt is not None and nxt.kind == "NP" and anchors:
                pending = last_rel = b.relation(anchors, ch.text)
            else:
                diag.append(f"dangling preposition {ch.text!r}")
            copular = False
        elif kind == "ADJ":
            anchors = subj if copular else ([last_np] if last_np is not None else [])
            if anchors:
                for a in anchors:
                    b.attribute(a, ch.text)
            else:
                diag.append(f"adjective {ch.text!r} has nothing to modify")
        elif kind == "REL":
            pass
        elif kind == "POSS":
            nxt = chunks[i + 1] if i + 1 < len(chunks) else None
            if nxt is not None and nxt.kind == "NP" and last_np is not None:
                b.attribute(last_np, nxt.phrase)
                i += 1
        prev = kind
        i += 1

    if not b.graph.nodes:
        diag.append(f"no pattern matched in {sentence!r}")
    if diag:
        logger.debug("caption %r: %s", sentence, "; ".join(diag))
        if notes is not None:
            notes.extend(diag)
    return b.graph
