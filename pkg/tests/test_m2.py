import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gecnoise.m2 import (
    Edit,
    M2ParseError,
    M2Sentence,
    apply_edits,
    invert_edits,
    iter_m2_path,
    parse_m2,
    read_m2,
    serialize_m2,
)
from synth import m2_corpus

TOKEN = st.text(alphabet=st.characters(blacklist_categories=("Z", "C")), min_size=1, max_size=6)


@st.composite
def m2_sentences(draw):
    tokens = draw(st.lists(TOKEN, min_size=0, max_size=12))
    n = len(tokens)
    edits = []
    pos = 0
    while pos <= n and draw(st.booleans()):
        start = draw(st.integers(pos, n))
        end = draw(st.integers(start, min(n, start + 3)))
        repl = tuple(draw(st.lists(TOKEN, max_size=3)))
        if start == end and not repl:
            repl = ("x",)
        edits.append(Edit(start, end, repl, "R:X", 0))
        # an insertion and a following edit at the same index would clash
        pos = end + 1
    return M2Sentence(tuple(tokens), tuple(edits))


def test_parse_basic():
    text = "S A b c .\nA 1 2|||R:SPELL|||B|||REQUIRED|||-NONE-|||0\nA 3 3|||M:PUNCT|||!|||REQUIRED|||-NONE-|||1\n\n"
    (s,) = parse_m2(text)
    assert s.source_tokens == ("A", "b", "c", ".")
    assert s.edits == (Edit(1, 2, ("B",), "R:SPELL", 0), Edit(3, 3, ("!",), "M:PUNCT", 1))
    assert s.annotators == (0, 1)


def test_noop_and_none_and_empty():
    text = (
        "S a b\nA -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||0\n\n"
        "S c d\nA 0 1|||U:DET|||-NONE-|||REQUIRED|||-NONE-|||0\nA 1 2|||U:X||||||REQUIRED|||-NONE-|||1\n"
    )
    a, b = parse_m2(text)
    assert a.edits == ()
    assert b.edits[0].replacement == () and b.edits[1].replacement == ()


@pytest.mark.parametrize(
    "text",
    [
        "A 0 1|||X|||y|||REQUIRED|||-NONE-|||0\n",
        "S a b\nA 0 3|||X|||y|||REQUIRED|||-NONE-|||0\n",
        "S a b\nA 1 0|||X|||y|||REQUIRED|||-NONE-|||0\n",
        "S a b\nA 0 1|||X|||y\n",
        "S a b\nA x 1|||X|||y|||REQUIRED|||-NONE-|||0\n",
        "S a b\nA 0 2|||X|||y|||REQUIRED|||-NONE-|||0\nA 1 2|||X|||z|||REQUIRED|||-NONE-|||0\n",
        "S a b\nA 1 1|||X|||y|||REQUIRED|||-NONE-|||0\nA 1 1|||X|||z|||REQUIRED|||-NONE-|||0\n",
        "S a b\nhello\n",
    ],
)
def test_malformed_raises_with_line(text):
    with pytest.raises(M2ParseError) as info:
        parse_m2(text)
    assert info.value.line is not None


def test_read_m2_reports_file_and_line(tmp_path):
    p = tmp_path / "bad.m2"
    p.write_bytes(b"S a b\n\nS c \xff d\n")
    with pytest.raises(M2ParseError) as info:
        read_m2(p)
    assert info.value.line == 3 and str(p) in str(info.value)
    with pytest.raises(M2ParseError) as info:
        list(iter_m2_path(p))
    assert info.value.line == 3


def test_iter_path_matches_read(fixtures):
    path = fixtures / "multi.m2"
    assert list(iter_m2_path(path)) == read_m2(path)


def test_edit_validation():
    with pytest.raises(ValueError):
        Edit(2, 1, ())
    with pytest.raises(ValueError):
        Edit(0, 1, ("a b",))
    with pytest.raises(ValueError):
        M2Sentence(("a",), (Edit(0, 2, ()),))


@settings(max_examples=300, deadline=None)
@given(m2_sentences())
def test_round_trip_property(sentence):
    text = serialize_m2([sentence])
    assert parse_m2(text) == [sentence]
    assert serialize_m2(parse_m2(text)) == text


@settings(max_examples=300, deadline=None)
@given(m2_sentences())
def test_inversion_property(sentence):
    corrected = apply_edits(sentence)
    clean, inverted = invert_edits(sentence)
    assert clean == corrected.tokens
    back = apply_edits(M2Sentence(clean, inverted))
    assert back.tokens == sentence.source_tokens


def test_apply_edits_provenance():
    s = M2Sentence(("a", "b", "c"), (Edit(1, 2, ("B", "BB")), Edit(3, 3, ("!",))))
    out = apply_edits(s)
    assert out.tokens == ("a", "B", "BB", "c", "!")
    assert out.source_tokens() == ("a", "b", "c")


def test_inversion_merges_adjacent_deletions():
    # two deletions of neighbouring source tokens become one inserted span
    s = M2Sentence(("x", "the", "the", "y"), (Edit(1, 2, ()), Edit(2, 3, ())))
    clean, inv = invert_edits(s)
    assert clean == ("x", "y")
    assert inv == (Edit(1, 1, ("the", "the"), inv[0].error_type, 0),)


def test_identity_corrections_dropped():
    s = M2Sentence(("a", "b"), (Edit(0, 1, ("a",)),))
    clean, inv = invert_edits(s)
    assert clean == ("a", "b") and inv == ()


def test_annotator_selection():
    s = M2Sentence(("a", "b"), (Edit(0, 1, ("A",), annotator=0), Edit(1, 2, ("B",), annotator=1)))
    assert apply_edits(s, 1).tokens == ("a", "B")
    assert apply_edits(s, 5).tokens == ("a", "b")


def test_synthetic_corpus_round_trip():
    corpus = m2_corpus(300, random.Random(3).randrange(1000))
    text = serialize_m2(corpus)
    assert parse_m2(text) == corpus
