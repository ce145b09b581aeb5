import math
import random
import statistics

import pytest
from scipy import integrate

from gecnoise.aspects import AspectKind, AspectUnavailable
from gecnoise.m2 import M2Sentence, apply_edits
from gecnoise.noiser import (
    ConfigError,
    NoiseConfig,
    NoiseError,
    derive_seed,
    noise_corpus,
    noise_sentence,
    sample_sentence_rate,
    truncated_normal_mean,
)
from gecnoise.profile import ErrorAmountDistribution, Profile, estimate_profile
from synth import clean_corpus, m2_corpus


@pytest.fixture(scope="module")
def profile():
    return estimate_profile(m2_corpus(2000, 31, rate=0.12, whole_strip=0.05), name="n")


@pytest.fixture(scope="module")
def corpus():
    return clean_corpus(400, 77)


def _quad_truncated_mean(mean, std):
    pdf = lambda x: math.exp(-0.5 * ((x - mean) / std) ** 2)
    z, _ = integrate.quad(pdf, 0.0, 1.0)
    m, _ = integrate.quad(lambda x: x * pdf(x), 0.0, 1.0)
    return m / z


@pytest.mark.parametrize("mean, std", [(0.2, 0.1), (0.05, 0.1), (0.5, 0.3), (0.95, 0.2)])
def test_truncated_mean_matches_quadrature(mean, std):
    assert truncated_normal_mean(mean, std) == pytest.approx(_quad_truncated_mean(mean, std), rel=1e-9)


def test_sampler_matches_truncated_normal():
    prof = Profile("x", "und", "dev", ErrorAmountDistribution(0.2, 0.1))
    rng = random.Random(5)
    draws = [sample_sentence_rate(prof, rng) for _ in range(40000)]
    assert all(0.0 <= d <= 1.0 for d in draws)
    expected = _quad_truncated_mean(0.2, 0.1)
    # standard error is about 0.0005
    assert statistics.fmean(draws) == pytest.approx(expected, abs=0.002)


def test_sampler_zero_std():
    prof = Profile("x", "und", "dev", ErrorAmountDistribution(0.3, 0.0))
    assert sample_sentence_rate(prof, random.Random(0)) == 0.3


def test_derive_seed():
    seeds = {derive_seed(s, i) for s in range(5) for i in range(200)}
    assert len(seeds) == 1000
    assert derive_seed(3, 4) == derive_seed(3, 4)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(target_rate=1.5),
        dict(target_rate="lots"),
        dict(aspect_selection=9),
        dict(aspect_selection=["grammar"]),
        dict(seed=-1),
        dict(preserve_tokenization=True, aspect_selection=5),
        dict(preserve_tokenization=True, aspect_selection=["casing", "whitespace"]),
    ],
)
def test_config_errors(kwargs):
    with pytest.raises(ConfigError):
        NoiseConfig(**kwargs)


def test_config_normalizes():
    c = NoiseConfig(target_rate="0.2", aspect_selection=["casing", 1])
    assert c.target_rate == 0.2 and c.explicit
    assert c.kinds == (AspectKind.DIACRITICS, AspectKind.CASING)
    assert NoiseConfig(aspect_selection=3).kinds == (AspectKind.DIACRITICS, AspectKind.CASING, AspectKind.SPELLING)
    assert NoiseConfig(preserve_tokenization=True, aspect_selection=4).kinds[-1] is AspectKind.AFFIX


def test_zero_target_is_identity(profile, corpus):
    out = list(noise_corpus(corpus, profile, NoiseConfig(target_rate=0.0, seed=4)))
    assert [o.tokens for o in out] == [tuple(c) for c in corpus]


def test_level_zero_selection_is_identity(profile, corpus):
    out = list(noise_corpus(corpus, profile, NoiseConfig(aspect_selection=0, target_rate=0.3)))
    assert [o.tokens for o in out] == [tuple(c) for c in corpus]


def test_deterministic_and_position_keyed(profile, corpus):
    config = NoiseConfig(target_rate=0.2, seed=11)
    a = list(noise_corpus(corpus, profile, config))
    b = list(noise_corpus(corpus, profile, config))
    assert a == b
    # sentence i depends only on (seed, i, sentence)
    for i in (0, 17, 399):
        assert noise_sentence(corpus[i], profile, config, sentence_index=i) == a[i]


def test_workers_do_not_change_output(profile, corpus):
    config = NoiseConfig(target_rate=0.2, seed=2, emit_m2=True)
    serial = list(noise_corpus(corpus, profile, config))
    parallel = list(noise_corpus(corpus, profile, config, workers=3, batch_size=64))
    assert serial == parallel


def test_seeds_differ(profile, corpus):
    outs = [tuple(o.tokens for o in noise_corpus(corpus, profile, NoiseConfig(target_rate=0.1, seed=s))) for s in range(4)]
    assert len(set(outs)) == 4


def test_gold_edits_restore_clean(profile, corpus):
    for clean, out in zip(corpus, noise_corpus(corpus, profile, NoiseConfig(target_rate=0.3, seed=9, emit_m2=True))):
        assert apply_edits(M2Sentence(out.tokens, out.gold_edits)).tokens == tuple(clean)
        assert out.to_m2().source_tokens == out.tokens


def test_no_gold_without_emit(profile, corpus):
    out = noise_sentence(corpus[0], profile, NoiseConfig(target_rate=0.3))
    assert out.gold_edits is None


def test_explicit_missing_aspect_raises(corpus):
    prof = estimate_profile(m2_corpus(300, 2, kinds=("casing", "spelling")))
    with pytest.raises(AspectUnavailable):
        list(noise_corpus(corpus, prof, NoiseConfig(aspect_selection=["whitespace"])))
    # a cumulative level silently uses what the profile has
    out = list(noise_corpus(corpus, prof, NoiseConfig(aspect_selection=8, target_rate=0.2)))
    assert len(out) == len(corpus)


def test_empty_sentence(profile):
    assert noise_sentence([], profile, NoiseConfig(target_rate=0.5)).tokens == ()


def test_bad_token_reports_line(profile):
    with pytest.raises(NoiseError) as info:
        list(noise_corpus([["a"], ["b", ""]], profile, NoiseConfig()))
    assert info.value.line == 2


def test_preserve_tokenization(profile, corpus):
    config = NoiseConfig(target_rate=0.3, aspect_selection=4, preserve_tokenization=True, seed=1)
    for clean, out in zip(corpus, noise_corpus(corpus, profile, config)):
        assert len(out.tokens) == len(clean)


def test_text_property_detokenizes(profile):
    out = noise_sentence(["Hello", ",", "world", "."], profile, NoiseConfig(target_rate=0.0))
    assert out.text == "Hello, world."
