"""Noise generation: per-sentence rate sampling and cumulative aspect application."""
from __future__ import annotations

import itertools
import math
import multiprocessing
import random
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .aspects import AspectKind, AspectUnavailable, Draft, GenerationContext, apply_to_draft
from .m2 import Edit, M2Sentence
from .profile import Profile, corpus_error_level, scale_profile
from .text import detokenize, nfc

__all__ = [
    "ConfigError",
    "NoiseError",
    "NoiseConfig",
    "NoisedSentence",
    "derive_seed",
    "truncated_normal_mean",
    "sample_sentence_rate",
    "noise_sentence",
    "noise_corpus",
]

MASK64 = (1 << 64) - 1
MAX_RATE_DRAWS = 100


class ConfigError(ValueError):
    pass


class NoiseError(RuntimeError):
    def __init__(self, line: int, cause: Exception):
        self.line = line
        self.cause = cause
        super().__init__(f"line {line}: {cause}")


def _parse_selection(selection) -> tuple[tuple[AspectKind, ...], bool]:
    """Return (kinds in canonical order, explicit?) for a cumulative level or a set."""
    if isinstance(selection, bool):
        raise ConfigError(f"invalid aspect selection {selection!r}")
    if isinstance(selection, int) and not isinstance(selection, AspectKind):
        if not 0 <= selection <= 8:
            raise ConfigError(f"cumulative aspect level must be in 0..8, got {selection}")
        return tuple(AspectKind(k) for k in range(1, selection + 1)), False
    if isinstance(selection, (str, AspectKind)):
        selection = [selection]
    try:
        kinds = {AspectKind.parse(k) for k in selection}
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    return tuple(sorted(kinds)), True


@dataclass(frozen=True)
class NoiseConfig:
    """How to noise: target rate, aspects, tokenization constraint and seed.

    ``aspect_selection`` is either a cumulative level ``k`` (aspects 1..k) or
    an explicit collection of :class:`AspectKind` values, numbers or names.
    ``target_rate`` is a rate in [0, 1] or ``"corpus"`` for the profile's own level.
    """

    target_rate: float | str = "corpus"
    aspect_selection: int | Iterable = 8
    preserve_tokenization: bool = False
    seed: int = 0
    emit_m2: bool = False

    def __post_init__(self):
        t = self.target_rate
        if isinstance(t, str):
            if t != "corpus":
                try:
                    t = float(t)
                except ValueError:
                    raise ConfigError(f"target rate must be a number or 'corpus', got {t!r}") from None
        if not isinstance(t, str):
            if isinstance(t, bool) or not isinstance(t, (int, float)) or not 0.0 <= t <= 1.0:
                raise ConfigError(f"target rate must be in [0, 1], got {t!r}")
            t = float(t)
        object.__setattr__(self, "target_rate", t)
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed <= MASK64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        kinds, explicit = _parse_selection(self.aspect_selection)
        if not explicit:
            object.__setattr__(self, "aspect_selection", len(kinds))
        else:
            object.__setattr__(self, "aspect_selection", frozenset(kinds))
        if self.preserve_tokenization:
            bad = [k.slug for k in kinds if not k.preserves_tokenization]
            if bad:
                raise ConfigError(f"preserve_tokenization allows only aspects 1-4; got {', '.join(bad)}")

    @property
    def kinds(self) -> tuple[AspectKind, ...]:
        if isinstance(self.aspect_selection, int):
            return tuple(AspectKind(k) for k in range(1, self.aspect_selection + 1))
        return tuple(sorted(self.aspect_selection))

    @property
    def explicit(self) -> bool:
        return not isinstance(self.aspect_selection, int)


@dataclass(frozen=True)
class NoisedSentence:
    tokens: tuple[str, ...]
    gold_edits: tuple[Edit, ...] | None
    sampled_rate: float

    @property
    def line(self) -> str:
        return " ".join(self.tokens)

    @property
    def text(self) -> str:
        return detokenize(self.tokens)

    def to_m2(self) -> M2Sentence:
        return M2Sentence(self.tokens, self.gold_edits or ())


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Independent 64-bit seed for sentence ``index`` of a run with ``seed``."""
    return _splitmix64(_splitmix64(seed & MASK64) ^ (index & MASK64))


def _norm_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def _norm_pdf(z: float) -> float:
    return math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def truncated_normal_mean(mean: float, std: float, low: float = 0.0, high: float = 1.0) -> float:
    if std <= 0.0:
        return min(high, max(low, mean))
    a, b = (low - mean) / std, (high - mean) / std
    z = _norm_cdf(b) - _norm_cdf(a)
    if z < 1e-12:
        return min(high, max(low, mean))
    return mean + std * (_norm_pdf(a) - _norm_pdf(b)) / z


def sample_sentence_rate(profile: Profile, rng: random.Random) -> float:
    """Draw a sentence's token-edit rate from the profile's error amount.

    Normal(mean, std) truncated to [0, 1] by redrawing; after
    ``MAX_RATE_DRAWS`` failures the last draw is clamped.
    """
    mean, std = profile.error_amount.mean, profile.error_amount.std
    if std == 0.0:
        return mean
    x = mean
    for _ in range(MAX_RATE_DRAWS):
        x = rng.gauss(mean, std)
        if 0.0 <= x <= 1.0:
            return x
    return min(1.0, max(0.0, x))


class _Prepared:
    """A profile scaled to the configured target plus its generation caches."""

    def __init__(self, profile: Profile, config: NoiseConfig):
        if config.target_rate != "corpus" and config.target_rate != corpus_error_level(profile):
            profile = scale_profile(profile, config.target_rate)
        if config.explicit:
            for kind in config.kinds:
                if not profile.has(kind):
                    raise AspectUnavailable(kind)
        self.profile = profile
        self.config = config
        self.kinds = tuple(k for k in config.kinds if profile.has(k))
        self.ctx = GenerationContext(profile)
        self.expected_rate = truncated_normal_mean(profile.error_amount.mean, profile.error_amount.std)

    def noise(self, tokens: Sequence[str], index: int) -> NoisedSentence:
        clean = tuple(nfc(t) for t in tokens)
        for tok in clean:
            if not tok or any(c.isspace() for c in tok):
                raise ValueError(f"invalid token {tok!r}")
        rng = random.Random(derive_seed(self.config.seed, index))
        rate = sample_sentence_rate(self.profile, rng)
        gold = () if self.config.emit_m2 else None
        if not clean or not self.kinds or rate == 0.0 or self.expected_rate == 0.0:
            return NoisedSentence(clean, gold, rate)
        # scale averages to 1 over sentences, so triggers keep their profile values
        scale = rate / self.expected_rate
        draft = Draft(clean)
        for kind in self.kinds:
            apply_to_draft(kind, draft, self.ctx, rng, scale)
        gold = draft.gold_edits() if self.config.emit_m2 else None
        return NoisedSentence(draft.tokens(), gold, rate)


def _as_tokens(line) -> tuple[str, ...]:
    if isinstance(line, str):
        return tuple(line.split())
    return tuple(line)


def noise_sentence(clean_tokens: Sequence[str] | str, profile: Profile, config: NoiseConfig,
                   sentence_index: int = 0) -> NoisedSentence:
    """Noise one sentence; the result depends only on the arguments."""
    return _Prepared(profile, config).noise(_as_tokens(clean_tokens), sentence_index)


_WORKER: _Prepared | None = None


def _init_worker(profile: Profile, config: NoiseConfig) -> None:
    global _WORKER
    _WORKER = _Prepared(profile, config)


def _worker_noise(item: tuple[int, tuple[str, ...]]) -> NoisedSentence:
    index, tokens = item
    try:
        return _WORKER.noise(tokens, index)
    except Exception as exc:
        raise NoiseError(index + 1, exc) from exc


def noise_corpus(
    lines: Iterable[Sequence[str] | str],
    profile: Profile,
    config: NoiseConfig,
    workers: int = 1,
    batch_size: int = 2048,
) -> Iterator[NoisedSentence]:
    """Noise a stream of sentences; sentence ``i`` uses index ``i``.

    Output order equals input order and does not depend on ``workers``.
    Memory use is bounded by ``batch_size`` sentences.
    """
    prepared = _Prepared(profile, config)
    if workers <= 1:
        for i, line in enumerate(lines):
            try:
                yield prepared.noise(_as_tokens(line), i)
            except Exception as exc:
                raise NoiseError(i + 1, exc) from exc
        return

    numbered = enumerate(_as_tokens(line) for line in lines)
    with multiprocessing.Pool(workers, initializer=_init_worker, initargs=(prepared.profile, config)) as pool:
        while True:
            batch = list(itertools.islice(numbered, batch_size))
            if not batch:
                break
            yield from pool.map(_worker_noise, batch, chunksize=max(1, len(batch) // (4 * workers)))
