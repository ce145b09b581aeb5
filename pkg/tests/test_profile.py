import json
import math
import random
from importlib import resources

import jsonschema
import pytest

from gecnoise.aspects import AspectKind
from gecnoise.m2 import read_m2, serialize_m2
from gecnoise.profile import (
    ErrorAmountDistribution,
    Profile,
    ProfileAccumulator,
    ProfileError,
    ProfileValidationError,
    ProfileVersionError,
    build_lexicon,
    corpus_error_level,
    dumps_profile,
    estimate_profile,
    estimate_profile_from_files,
    invert_edits,
    load_profile,
    loads_profile,
    save_profile,
    scale_profile,
    token_edit_rate,
)
from synth import m2_corpus

PROFILE_SCHEMA = json.loads(resources.files("gecnoise").joinpath("schemas/profile.schema.json").read_text())


@pytest.fixture(scope="module")
def profile():
    return estimate_profile(m2_corpus(2000, 8, rate=0.12, whole_strip=0.05), name="synth", language="en")


def test_ten_tokens_one_edit(fixtures):
    p = estimate_profile(read_m2(fixtures / "ten_tokens_one_edit.m2"))
    assert p.level == pytest.approx(0.1, abs=0)
    assert p.error_amount.std == 0.0
    assert p.trigger(AspectKind.SPELLING, "p_word") == pytest.approx(0.1)
    assert list(p.aspects) == ["spelling"]


def test_clean_corpus_has_no_aspects(fixtures):
    p = estimate_profile(read_m2(fixtures / "clean.m2"))
    assert p.level == 0.0 and p.aspects == {}


def test_hand_counted_profile(fixtures):
    p = estimate_profile(read_m2(fixtures / "multi.m2"))
    # clean sides: "Anna goes to school in Prague ." with 3 charged tokens,
    # the Czech sentence (8 tokens, 2 charged), and "He has never seen such a
    # thing ." with seen, such a (2) and the extra "." charged
    rates = [3 / 7, 2 / 8, 4 / 8]
    assert p.level == pytest.approx(math.fsum(rates) / 3)
    assert p.trigger(AspectKind.DIACRITICS, "p_sentence") == 1.0
    assert p.trigger(AspectKind.WORD_ORDER, "p_reorder") == pytest.approx(1 / 3)


def test_token_edit_rate():
    from gecnoise.m2 import Edit
    assert token_edit_rate(4, [Edit(0, 2, ("x",)), Edit(3, 3, ("y",))]) == 0.75
    assert token_edit_rate(0, []) == 0.0
    assert token_edit_rate(1, [Edit(0, 1, ()), Edit(1, 1, ("a",))]) == 1.0


def test_profile_json_round_trip(profile, tmp_path):
    text = dumps_profile(profile)
    assert loads_profile(text) == profile
    assert dumps_profile(loads_profile(text)) == text
    save_profile(profile, tmp_path / "p.json")
    assert load_profile(tmp_path / "p.json") == profile
    jsonschema.validate(json.loads(text), PROFILE_SCHEMA)


def _mutate(profile, fn):
    data = json.loads(dumps_profile(profile))
    fn(data)
    return json.dumps(data)


@pytest.mark.parametrize(
    "mutation, error",
    [
        (lambda d: d["aspects"]["casing"]["triggers"].update(p_first=1.5), ProfileValidationError),
        (lambda d: d["aspects"]["spelling"]["distributions"]["op"].update(swap=0.9), ProfileValidationError),
        (lambda d: d.update(extra=1), ProfileValidationError),
        (lambda d: d.pop("lexicon"), ProfileValidationError),
        (lambda d: d.update(schema_version=2), ProfileVersionError),
        (lambda d: d.update(role="train"), ProfileValidationError),
        (lambda d: d["error_amount"].update(mean=-0.1), ProfileValidationError),
        (lambda d: d["aspects"].update(grammar={}), ProfileValidationError),
    ],
)
def test_validation_errors(profile, mutation, error):
    with pytest.raises(error):
        loads_profile(_mutate(profile, mutation))


def test_invalid_json():
    with pytest.raises(ProfileError):
        loads_profile("{not json")


@pytest.mark.parametrize("target", [0.0, 0.05, 0.10, 0.2, 0.3])
def test_scale_exact(profile, target):
    scaled = scale_profile(profile, target)
    assert corpus_error_level(scaled) == target
    f = target / profile.level
    for slug, block in scaled.aspects.items():
        for t, p in block["triggers"].items():
            assert p == pytest.approx(min(1.0, profile.aspects[slug]["triggers"][t] * f), rel=1e-12)


def test_scale_saturation(profile):
    scaled = scale_profile(profile, 1.0)
    flagged = [(s, t) for s, b in scaled.aspects.items() for t in b["saturated"]]
    assert flagged
    for s, t in flagged:
        assert scaled.aspects[s]["triggers"][t] == 1.0
    assert loads_profile(dumps_profile(scaled)) == scaled


def test_scale_errors(profile, fixtures):
    with pytest.raises(ProfileError):
        scale_profile(profile, 1.2)
    zero = estimate_profile(read_m2(fixtures / "clean.m2"))
    with pytest.raises(ProfileError, match="unscalable"):
        scale_profile(zero, 0.1)
    assert scale_profile(zero, 0.0) is zero


def test_accumulator_merge_matches_whole():
    corpus = m2_corpus(400, 12, rate=0.15)
    inverted = [invert_edits(s) for s in corpus]
    lexicon = build_lexicon(c for c, _ in inverted)
    whole = ProfileAccumulator(lexicon)
    for c, e in inverted:
        whole.add(c, e)
    parts = []
    rng = random.Random(0)
    cuts = sorted(rng.sample(range(1, 400), 3))
    for a, b in zip([0] + cuts, cuts + [400]):
        acc = ProfileAccumulator(lexicon)
        for c, e in inverted[a:b]:
            acc.add(c, e)
        parts.append(acc)
    left = parts[0].merge(parts[1]).merge(parts[2].merge(parts[3]))
    assert left.finalize("x", "und", "dev") == whole.finalize("x", "und", "dev")


def test_files_concatenate(tmp_path):
    a, b = m2_corpus(150, 1), m2_corpus(150, 2)
    pa, pb, pab = tmp_path / "a.m2", tmp_path / "b.m2", tmp_path / "ab.m2"
    pa.write_text(serialize_m2(a), encoding="utf-8")
    pb.write_text(serialize_m2(b), encoding="utf-8")
    pab.write_text(serialize_m2(a + b), encoding="utf-8")
    assert estimate_profile_from_files([pa, pb]) == estimate_profile_from_files([pab])
    assert estimate_profile_from_files([pab]) == estimate_profile(a + b)


def test_estimate_needs_sentences():
    with pytest.raises(ProfileError):
        estimate_profile([])


def test_direct_construction_validates():
    with pytest.raises(ProfileValidationError):
        Profile("x", "und", "dev", ErrorAmountDistribution(0.1, -1.0))
    p = Profile("x", "und", "test", ErrorAmountDistribution(0.1, 0.0))
    assert p.role.value == "test"
