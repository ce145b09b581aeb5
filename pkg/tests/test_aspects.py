import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gecnoise.aspects import (
    AffixDetail,
    AspectKind,
    AspectUnavailable,
    CharOpKind,
    Draft,
    GenerationContext,
    apply_aspect,
    apply_to_draft,
    classify_edit,
    classify_pair,
    count_units,
)
from gecnoise.m2 import Edit, M2Sentence, apply_edits
from gecnoise.profile import estimate_profile
from synth import clean_corpus, m2_corpus

LEXICON = {"brake": 3, "break": 2, "a": 10, "the": 10}


@pytest.mark.parametrize(
    "clean, noisy, kind",
    [
        (["kůň"], ["kun"], AspectKind.DIACRITICS),
        (["kůň"], ["kuň"], AspectKind.DIACRITICS),
        (["Prague"], ["prague"], AspectKind.CASING),
        (["break"], ["brake"], AspectKind.SPELLING),
        (["wrong"], ["worng"], AspectKind.SPELLING),
        (["do"], ["doing"], AspectKind.AFFIX),
        (["doing"], ["do"], AspectKind.AFFIX),
        (["happy"], ["unhappy"], AspectKind.AFFIX),
        (["the"], ["a"], AspectKind.COMMON_OTHER),
        ([","], [], AspectKind.PUNCTUATION),
        ([], [","], AspectKind.PUNCTUATION),
        (["."], ["!"], AspectKind.PUNCTUATION),
        (["every", "day"], ["everyday"], AspectKind.WHITESPACE),
        (["cannot"], ["can", "not"], AspectKind.WHITESPACE),
        (["such", "a"], ["a", "such"], AspectKind.WORD_ORDER),
        (["seen"], ["saw"], AspectKind.COMMON_OTHER),
        ([], ["the"], AspectKind.COMMON_OTHER),
    ],
)
def test_classify(clean, noisy, kind):
    assert classify_pair(clean, noisy, LEXICON)[0] is kind


def test_spelling_details():
    _, detail = classify_pair(["break"], ["brake"], LEXICON)
    assert detail.confusion
    _, detail = classify_pair(["wrong"], ["worng"], LEXICON)
    assert not detail.confusion and [op.kind for op in detail.ops] == [CharOpKind.SWAP]


def test_affix_detail():
    _, detail = classify_pair(["do"], ["doing"])
    assert detail == AffixDetail("suffix", "", "ing")
    _, detail = classify_pair(["happy"], ["unhappy"])
    assert detail.position == "prefix" and detail.noisy == "un"


def test_classify_edit_bounds():
    with pytest.raises(ValueError):
        classify_edit(["a"], Edit(0, 2, ("b",)))


def test_count_units_hand():
    units = count_units(["Kůň", "se", "pase", ",", "ano", "."])
    assert units[AspectKind.DIACRITICS] == {"p_sentence": 1, "p_char": 2}
    assert units[AspectKind.CASING] == {"p_first": 4, "p_other": 8}
    assert units[AspectKind.SPELLING] == {"p_word": 4}
    assert units[AspectKind.PUNCTUATION] == {"p_insert": 7, "p_remove": 2, "p_replace": 2}
    assert units[AspectKind.WHITESPACE] == {"p_remove": 5, "p_insert": 4}
    assert units[AspectKind.COMMON_OTHER] == {"p_common": 6}


def test_aspect_parse():
    assert AspectKind.parse("word-order") is AspectKind.WORD_ORDER
    assert AspectKind.parse("3") is AspectKind.SPELLING
    assert AspectKind.parse(8) is AspectKind.COMMON_OTHER
    with pytest.raises(ValueError):
        AspectKind.parse("grammar")


@pytest.fixture(scope="module")
def profile():
    return estimate_profile(m2_corpus(3000, 21, rate=0.15, whole_strip=0.05), name="aspects")


@pytest.fixture(scope="module")
def ctx(profile):
    return GenerationContext(profile)


@pytest.mark.parametrize("kind", list(AspectKind))
def test_operator_edits_reclassify_as_own_kind(kind, ctx, profile):
    rng = random.Random(kind.value)
    seen = 0
    for clean in clean_corpus(300, kind.value):
        draft = Draft(clean)
        apply_to_draft(kind, draft, ctx, rng, scale=3.0)
        noisy = draft.tokens()
        gold = draft.gold_edits()
        # gold edits map the noise back to the clean sentence
        assert apply_edits(M2Sentence(noisy, gold)).tokens == tuple(clean)
        for e in gold:
            seen += 1
            src = noisy[e.start : e.end]
            got, _ = classify_pair(e.replacement, src, profile.lexicon)
            assert got is kind, (e, src)
            assert e.error_type == kind.name
        if kind.preserves_tokenization:
            assert len(noisy) == len(clean)
    assert seen > 0


def test_missing_aspect_raises():
    prof = estimate_profile(m2_corpus(200, 3, kinds=("casing",)))
    assert not prof.has(AspectKind.SPELLING)
    with pytest.raises(AspectUnavailable, match="aspect unavailable"):
        apply_aspect("spelling", ["a", "b"], prof, random.Random(0))


def test_scale_zero_is_identity(profile):
    toks = clean_corpus(1, 4)[0]
    for kind in AspectKind:
        assert apply_aspect(kind, toks, profile, random.Random(1), scale=0.0) == list(toks)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.floats(0.0, 5.0))
def test_tokenization_kinds_keep_length(profile, seed, scale):
    # hypothesis shares the module fixture; generation does not mutate it
    rng = random.Random(seed)
    toks = clean_corpus(1, seed)[0]
    draft = Draft(toks)
    ctx = GenerationContext(profile)
    for kind in (AspectKind.DIACRITICS, AspectKind.CASING, AspectKind.SPELLING, AspectKind.AFFIX):
        apply_to_draft(kind, draft, ctx, rng, scale)
    assert len(draft.tokens()) == len(toks)
