from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgvq.graph import BoundingBox, NodeKind
from sgvq.lexicon import DEFAULT_LEXICON, load_lexicon_file
from sgvq.parser import lemmatize_verb, parse_caption, tag_tokens

S, R, A = NodeKind.SUBJECT, NodeKind.RELATIONSHIP, NodeKind.ATTRIBUTE


def edges(g) -> set[tuple[str, str]]:
    return {(g.nodes[s].label, g.nodes[d].label) for s, d in g.edges}


def labels(g, kind) -> list[str]:
    return sorted(n.label for n in g.nodes_of(kind))


def test_tagging():
    got = [(t.text, t.tag.value) for t in tag_tokens("Brown cat sitting")]
    assert got == [("brown", "ADJ"), ("cat", "NOUN"), ("sitting", "VERB")]
    assert tag_tokens("") == []
    got = [(t.text, t.tag.value) for t in tag_tokens("Woman is tall.")]
    assert got == [("woman", "NOUN"), ("is", "COP"), ("tall", "ADJ")]


@pytest.mark.parametrize(
    "word,lemma",
    [("wearing", "wear"), ("sitting", "sit"), ("eat", "eat"), ("ate", "eat"), ("stirring", "stir"),
     ("holding", "hold"), ("wore", "wear"), ("played", "play"), ("lying", "lie"), ("leaning", "lean"),
     ("dancing", "dance"), ("runs", "run"), ("carries", "carry")],
)
def test_lemmatize(word, lemma):
    assert lemmatize_verb(word) == lemma


def test_scene_captions():
    g = parse_caption("Brown cat sitting on a bench")
    assert edges(g) == {("cat", "brown"), ("cat", "sit on"), ("sit on", "bench")}
    assert labels(g, S) == ["bench", "cat"]

    g = parse_caption("Woman with long hair")
    assert edges(g) == {("woman", "long hair")}
    assert labels(g, A) == ["long hair"]

    g = parse_caption("Woman playing with cat")
    assert edges(g) == {("woman", "play with"), ("play with", "cat")}


def test_copula_and_passive():
    assert edges(parse_caption("Man is tall")) == {("man", "tall")}
    assert edges(parse_caption("The ball is thrown by the man")) == {("man", "throw"), ("throw", "ball")}
    assert edges(parse_caption("Dog is being fed by a woman")) == {("woman", "feed"), ("feed", "dog")}


def test_relative_clause_and_coordination():
    assert edges(parse_caption("Man that runs")) == {("man", "run")}
    g = parse_caption("Man and woman sitting on a couch")
    assert edges(g) == {("man", "sit on"), ("woman", "sit on"), ("sit on", "couch")}
    g = parse_caption("Man wearing a suit and tie")
    assert edges(g) == {("man", "wear"), ("wear", "suit"), ("wear", "tie")}


def test_existential_and_multiword_prep():
    g = parse_caption("There is a man in front of a table")
    assert edges(g) == {("man", "in front of"), ("in front of", "table")}


def test_plural_and_numeral():
    assert edges(parse_caption("Two dogs")) == {("dog", "two")}


def test_bbox_goes_to_first_subject():
    box = BoundingBox(1, 2, 3, 4)
    g = parse_caption("Woman playing with cat", box)
    boxed = [n for n in g.nodes.values() if n.bbox is not None]
    assert [(n.label, n.bbox) for n in boxed] == [("woman", box)]


@pytest.mark.parametrize("text", ["", "   ", "!!!", "the of and", "123 456"])
def test_junk_is_total(text):
    g = parse_caption(text)
    g.validate()


def test_custom_lexicon(tmp_path):
    path = tmp_path / "lex.tsv"
    path.write_text("# extra\nzorb\tVERB\nglim\tNOUN\n", encoding="utf-8")
    lex = load_lexicon_file(path)
    assert lex["zorb"] == "VERB" and lex["man"] == DEFAULT_LEXICON["man"]
    g = parse_caption("man zorbing glim", lexicon=lex)
    assert edges(g) == {("man", "zorb"), ("zorb", "glim")}


_words = st.sampled_from(sorted(DEFAULT_LEXICON)[:200] + ["zzq", "running", "ate", "'s", ",", "."])


@settings(max_examples=300, deadline=None)
@given(st.lists(_words, max_size=12))
def test_parse_is_total_and_valid(words):
    g = parse_caption(" ".join(words))
    g.validate()


@settings(max_examples=200, deadline=None)
@given(
    st.sampled_from(["tall", "brown", "young", "old", "small"]),
    st.sampled_from(["man", "woman", "dog", "girl", "boy"]),
    st.sampled_from(["holding", "wearing", "eating", "watching"]),
    st.sampled_from(["ball", "hat", "apple", "phone", "book"]),
)
def test_adj_noun_verb_noun_shape(adj, subj, verb, obj):
    g = parse_caption(f"{adj} {subj} {verb} a {obj}")
    assert len(labels(g, S)) == 2
    assert len(labels(g, R)) == 1
    assert len(labels(g, A)) == 1
    assert len(g.edges) == 3
