import unicodedata

from hypothesis import given, settings
from hypothesis import strategies as st

from gecnoise.text import (
    detokenize,
    flip_case,
    has_diacritic,
    is_cased,
    is_punct_token,
    osa_distance,
    osa_ops,
    strip_diacritics,
    tokenize_plain,
)


def test_strip_examples():
    assert strip_diacritics("Žluťoučký kůň") == "Zlutoucky kun"
    assert strip_diacritics("Ångström façade naïve") == "Angstrom facade naive"
    assert strip_diacritics("plain") == "plain"


def test_strip_mask_selects_chars():
    assert strip_diacritics("kůň", [False, True, False]) == "kuň"


def test_strip_handles_decomposed_input():
    assert strip_diacritics(unicodedata.normalize("NFD", "kůň")) == "kun"


@settings(max_examples=500)
@given(st.text())
def test_strip_idempotent(s):
    once = strip_diacritics(s)
    assert strip_diacritics(once) == once


def test_has_diacritic():
    assert has_diacritic("ů") and has_diacritic("Ž")
    assert not has_diacritic("u") and not has_diacritic("ß")


@settings(max_examples=500)
@given(st.characters())
def test_casing_involution(ch):
    if is_cased(ch):
        assert flip_case(flip_case(ch)) == ch
        assert flip_case(ch) != ch


def test_punct_tokens():
    assert is_punct_token(",") and is_punct_token("...") and is_punct_token("«")
    assert not is_punct_token("a,") and not is_punct_token("+")


def _osa_reference(a, b):
    # textbook restricted Damerau-Levenshtein, written independently
    d = {}
    for i in range(-1, len(a) + 1):
        d[i, -1] = i + 1
    for j in range(-1, len(b) + 1):
        d[-1, j] = j + 1
    for i in range(len(a)):
        for j in range(len(b)):
            cost = 0 if a[i] == b[j] else 1
            d[i, j] = min(d[i - 1, j] + 1, d[i, j - 1] + 1, d[i - 1, j - 1] + cost)
            if i and j and a[i] == b[j - 1] and a[i - 1] == b[j]:
                d[i, j] = min(d[i, j], d[i - 2, j - 2] + 1)
    return d[len(a) - 1, len(b) - 1]


WORD = st.text(alphabet="abcde", max_size=7)


@settings(max_examples=400)
@given(WORD, WORD)
def test_osa_matches_reference(a, b):
    assert osa_distance(a, b) == _osa_reference(a, b)
    assert len(osa_ops(a, b)) == osa_distance(a, b)


def test_osa_examples():
    assert osa_distance("wrong", "worng") == 1
    assert osa_ops("wrong", "worng")[0][0] == "swap"
    assert osa_distance("ca", "abc") == 3


def test_tokenize_detokenize():
    toks = tokenize_plain("Hello, world (really)! Don't stop.")
    assert toks == ["Hello", ",", "world", "(", "really", ")", "!", "Don't", "stop", "."]
    assert detokenize(toks) == "Hello, world (really)! Don't stop."


def test_strip_drops_marks_left_after_composition():
    # NFC keeps a second acute as a separate mark; both must go
    assert strip_diacritics("ṕ́") == "p"
    assert strip_diacritics("q́") == "q"
    # a mark with no base is kept
    assert strip_diacritics("́a") == "́a"
