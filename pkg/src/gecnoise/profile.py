"""Error profiles: estimation from M2 corpora, scaling, and JSON persistence."""
from __future__ import annotations

import enum
import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .aspects import TRIGGERS, AspectKind, classify_edit, count_units
from .m2 import Edit, M2Sentence, invert_edits, iter_m2_path
from .text import is_word, nfc

__all__ = [
    "SCHEMA_VERSION",
    "ProfileRole",
    "ErrorAmountDistribution",
    "Profile",
    "ProfileError",
    "ProfileValidationError",
    "ProfileVersionError",
    "ProfileAccumulator",
    "token_edit_rate",
    "build_lexicon",
    "estimate_profile",
    "estimate_profile_from_files",
    "corpus_error_level",
    "scale_profile",
    "save_profile",
    "load_profile",
    "dumps_profile",
    "loads_profile",
]

SCHEMA_VERSION = 1
SUM_TOLERANCE = 1e-9
MAX_PHRASE = 3

# distribution name -> True if conditional (mapping of categoricals)
DISTRIBUTIONS: dict[AspectKind, dict[str, bool]] = {
    AspectKind.DIACRITICS: {},
    AspectKind.CASING: {},
    AspectKind.SPELLING: {"op": False, "n_ops": False, "insert_char": False, "replace_char": True},
    AspectKind.AFFIX: {
        "affix_type": False,
        "suffix_source": False,
        "suffix_target": True,
        "prefix_source": False,
        "prefix_target": True,
    },
    AspectKind.PUNCTUATION: {"insert": False, "replace": True},
    AspectKind.WHITESPACE: {},
    AspectKind.WORD_ORDER: {"window": False},
    AspectKind.COMMON_OTHER: {"source": False, "target": True},
}

TOP_LEVEL_KEYS = ("schema_version", "name", "language", "role", "error_amount", "aspects", "lexicon", "alphabet")


class ProfileError(ValueError):
    pass


class ProfileValidationError(ProfileError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ProfileVersionError(ProfileError):
    def __init__(self, found):
        self.found = found
        super().__init__(f"unsupported profile schema_version {found!r}; expected {SCHEMA_VERSION}")


class ProfileRole(enum.Enum):
    DEVELOPMENT = "development"
    TEST = "test"

    @classmethod
    def parse(cls, value: "ProfileRole | str") -> "ProfileRole":
        if isinstance(value, ProfileRole):
            return value
        text = str(value).strip().lower()
        if text in ("dev", "development"):
            return cls.DEVELOPMENT
        if text == "test":
            return cls.TEST
        raise ValueError(f"unknown profile role {value!r}; use 'dev' or 'test'")


@dataclass(frozen=True)
class ErrorAmountDistribution:
    """Mean and standard deviation of the per-sentence token-edit rate."""

    mean: float
    std: float


def _prob(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProfileValidationError(where, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value) or not 0.0 <= value <= 1.0:
        raise ProfileValidationError(where, f"probability {value!r} outside [0, 1]")
    return value


def _categorical(dist, where: str) -> dict[str, float]:
    if not isinstance(dist, Mapping) or not dist:
        raise ProfileValidationError(where, "expected a non-empty mapping")
    out = {}
    for k, v in dist.items():
        if not isinstance(k, str):
            raise ProfileValidationError(where, f"non-string key {k!r}")
        out[k] = _prob(v, f"{where}.{k}")
    total = math.fsum(out.values())
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise ProfileValidationError(where, f"probabilities sum to {total!r}, not 1")
    return out


def _validate_aspects(aspects, alphabet: set[str]) -> dict[str, dict]:
    if not isinstance(aspects, Mapping):
        raise ProfileValidationError("aspects", "expected a mapping")
    out = {}
    for slug, block in aspects.items():
        where = f"aspects.{slug}"
        try:
            kind = AspectKind[str(slug).upper()]
        except KeyError:
            raise ProfileValidationError(where, "unknown aspect") from None
        if kind.slug != slug:
            raise ProfileValidationError(where, "unknown aspect")
        if not isinstance(block, Mapping):
            raise ProfileValidationError(where, "expected a mapping")
        extra = set(block) - {"triggers", "distributions", "saturated"}
        if extra:
            raise ProfileValidationError(f"{where}.{sorted(extra)[0]}", "unknown key")
        triggers = block.get("triggers")
        if not isinstance(triggers, Mapping):
            raise ProfileValidationError(f"{where}.triggers", "missing or not a mapping")
        if set(triggers) != set(TRIGGERS[kind]):
            raise ProfileValidationError(f"{where}.triggers", f"expected keys {list(TRIGGERS[kind])}")
        trig = {t: _prob(triggers[t], f"{where}.triggers.{t}") for t in TRIGGERS[kind]}

        dists_in = block.get("distributions", {})
        if not isinstance(dists_in, Mapping):
            raise ProfileValidationError(f"{where}.distributions", "expected a mapping")
        shapes = DISTRIBUTIONS[kind]
        dists = {}
        for name, dist in dists_in.items():
            dwhere = f"{where}.distributions.{name}"
            if name not in shapes:
                raise ProfileValidationError(dwhere, "unknown distribution")
            if shapes[name]:
                if not isinstance(dist, Mapping):
                    raise ProfileValidationError(dwhere, "expected a mapping")
                dists[name] = {k: _categorical(v, f"{dwhere}.{k}") for k, v in dist.items()}
            else:
                dists[name] = _categorical(dist, dwhere)
        if kind is AspectKind.SPELLING:
            for ch in dists.get("insert_char", {}):
                if ch not in alphabet:
                    raise ProfileValidationError(f"{where}.distributions.insert_char.{ch}", "not in alphabet")
            for src, row in dists.get("replace_char", {}).items():
                for ch in (src, *row):
                    if ch not in alphabet:
                        raise ProfileValidationError(f"{where}.distributions.replace_char.{src}", f"{ch!r} not in alphabet")

        saturated = block.get("saturated", [])
        if not isinstance(saturated, list) or any(s not in TRIGGERS[kind] for s in saturated):
            raise ProfileValidationError(f"{where}.saturated", "expected a list of trigger names")
        out[slug] = {"triggers": trig, "distributions": dists, "saturated": sorted(set(saturated))}
    return out


@dataclass(frozen=True)
class Profile:
    """Error statistics of one speaker group.

    ``aspects`` maps aspect slugs to blocks with ``triggers`` (probabilities
    scaled with the noise level), ``distributions`` (fixed internal
    categoricals) and ``saturated`` (triggers clamped at 1 by scaling).
    Aspects never observed are absent.
    """

    name: str
    language: str
    role: ProfileRole
    error_amount: ErrorAmountDistribution
    aspects: dict = field(default_factory=dict)
    lexicon: dict = field(default_factory=dict)
    alphabet: tuple = ()
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ProfileVersionError(self.schema_version)
        object.__setattr__(self, "role", ProfileRole.parse(self.role))
        mean = _prob(self.error_amount.mean, "error_amount.mean")
        std = self.error_amount.std
        if isinstance(std, bool) or not isinstance(std, (int, float)) or not math.isfinite(std) or std < 0:
            raise ProfileValidationError("error_amount.std", f"expected a finite non-negative number, got {std!r}")
        object.__setattr__(self, "error_amount", ErrorAmountDistribution(mean, float(std)))
        alphabet = tuple(self.alphabet)
        for ch in alphabet:
            if not isinstance(ch, str) or len(ch) != 1:
                raise ProfileValidationError("alphabet", f"entry {ch!r} is not a single character")
        if len(set(alphabet)) != len(alphabet):
            raise ProfileValidationError("alphabet", "duplicate characters")
        object.__setattr__(self, "alphabet", alphabet)
        if not isinstance(self.lexicon, Mapping):
            raise ProfileValidationError("lexicon", "expected a mapping")
        for word, count in self.lexicon.items():
            if not isinstance(word, str) or not word or any(c.isspace() for c in word):
                raise ProfileValidationError("lexicon", f"invalid word {word!r}")
            if isinstance(count, bool) or not isinstance(count, int) or count < 1:
                raise ProfileValidationError(f"lexicon.{word}", f"count must be a positive integer, got {count!r}")
        object.__setattr__(self, "lexicon", dict(self.lexicon))
        object.__setattr__(self, "aspects", _validate_aspects(self.aspects, set(alphabet)))

    @property
    def level(self) -> float:
        return self.error_amount.mean

    def has(self, kind: AspectKind) -> bool:
        return kind.slug in self.aspects

    def trigger(self, kind: AspectKind, name: str) -> float:
        block = self.aspects.get(kind.slug)
        return 0.0 if block is None else block["triggers"][name]

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "name": self.name,
            "language": self.language,
            "role": self.role.value,
            "error_amount": {"mean": self.error_amount.mean, "std": self.error_amount.std},
            "aspects": self.aspects,
            "lexicon": self.lexicon,
            "alphabet": list(self.alphabet),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Profile":
        if not isinstance(data, Mapping):
            raise ProfileValidationError("<root>", "expected a JSON object")
        if "schema_version" not in data:
            raise ProfileValidationError("schema_version", "missing required field")
        if data["schema_version"] != SCHEMA_VERSION:
            raise ProfileVersionError(data["schema_version"])
        for key in TOP_LEVEL_KEYS:
            if key not in data:
                raise ProfileValidationError(key, "missing required field")
        extra = set(data) - set(TOP_LEVEL_KEYS)
        if extra:
            raise ProfileValidationError(sorted(extra)[0], "unknown field")
        amount = data["error_amount"]
        if not isinstance(amount, Mapping):
            raise ProfileValidationError("error_amount", "expected an object with mean and std")
        for key in ("mean", "std"):
            if key not in amount:
                raise ProfileValidationError(f"error_amount.{key}", "missing required field")
        for key in ("name", "language"):
            if not isinstance(data[key], str):
                raise ProfileValidationError(key, "expected a string")
        try:
            role = ProfileRole.parse(data["role"])
        except ValueError as exc:
            raise ProfileValidationError("role", str(exc)) from None
        if not isinstance(data["alphabet"], list):
            raise ProfileValidationError("alphabet", "expected a list of characters")
        return cls(
            name=data["name"],
            language=data["language"],
            role=role,
            error_amount=ErrorAmountDistribution(amount["mean"], amount["std"]),
            aspects=data["aspects"],
            lexicon=data["lexicon"],
            alphabet=tuple(data["alphabet"]),
        )


# -- estimation ---------------------------------------------------------------


def token_edit_rate(n_clean: int, edits: Iterable[Edit]) -> float:
    """Edited clean tokens (an insertion counts as one) over the clean length, capped at 1."""
    charged = sum(max(e.end - e.start, 1) for e in edits)
    if n_clean == 0:
        return 1.0 if charged else 0.0
    return min(1.0, charged / n_clean)


def build_lexicon(clean_sentences: Iterable[Sequence[str]], extra_words: Iterable[str] = ()) -> Counter:
    lexicon: Counter = Counter()
    for tokens in clean_sentences:
        lexicon.update(t for t in tokens if is_word(t))
    for w in extra_words:
        w = nfc(w.strip())
        if w and not any(c.isspace() for c in w) and w not in lexicon:
            lexicon[w] = 1
    return lexicon


class ProfileAccumulator:
    """Mergeable counts behind a profile.

    ``merge`` adds counts, so partial accumulators over disjoint parts of a
    corpus combine in any order.  All partials must share one lexicon.
    """

    def __init__(self, lexicon: Mapping[str, int]):
        self.lexicon = lexicon
        self.units: Counter = Counter()
        self.events: Counter = Counter()
        self.flat: defaultdict = defaultdict(Counter)  # (slug, dist) -> Counter
        self.cond: defaultdict = defaultdict(lambda: defaultdict(Counter))  # (slug, dist) -> key -> Counter
        self.observed: set[AspectKind] = set()
        self.alphabet: set[str] = set()
        self.rates: list[float] = []

    def add(self, clean: Sequence[str], inverted: Sequence[Edit]) -> bool:
        """Count one clean sentence and its errors. Returns False if unusable (empty)."""
        clean = tuple(nfc(t) for t in clean)
        if not clean:
            return False
        for tok in clean:
            self.alphabet.update(tok)
        units = count_units(clean)
        stripped = 0
        for edit in inverted:
            for tok in edit.replacement:
                self.alphabet.update(nfc(tok))
            ce = classify_edit(clean, edit, self.lexicon)
            self.observed.add(ce.kind)
            stripped += self._count(ce, clean)

        d = AspectKind.DIACRITICS.slug
        n_diac = units[AspectKind.DIACRITICS]["p_char"]
        self.units[d, "p_sentence"] += units[AspectKind.DIACRITICS]["p_sentence"]
        if n_diac >= 2 and stripped == n_diac:
            self.events[d, "p_sentence"] += 1
        else:
            self.units[d, "p_char"] += n_diac
            self.events[d, "p_char"] += stripped
        for kind, per_trigger in units.items():
            if kind is AspectKind.DIACRITICS:
                continue
            for name, count in per_trigger.items():
                self.units[kind.slug, name] += count

        self.rates.append(token_edit_rate(len(clean), inverted))
        return True

    def _count(self, ce, clean) -> int:
        kind, detail, edit = ce.kind, ce.detail, ce.edit
        slug = kind.slug
        src = tuple(nfc(t) for t in clean[edit.start : edit.end])
        tgt = tuple(nfc(t) for t in edit.replacement)
        if kind is AspectKind.DIACRITICS:
            return detail.stripped
        if kind is AspectKind.CASING:
            self.events[slug, "p_first"] += detail.first
            self.events[slug, "p_other"] += detail.other
        elif kind is AspectKind.SPELLING:
            self.events[slug, "p_word"] += 1
            if detail.confusion:
                self.flat[slug, "op"]["confusion"] += 1
            else:
                self.flat[slug, "n_ops"][str(len(detail.ops))] += 1
                for op in detail.ops:
                    self.flat[slug, "op"][op.kind.value] += 1
                    if op.kind.value == "insert":
                        self.flat[slug, "insert_char"][op.chars] += 1
                    elif op.kind.value == "replace":
                        self.cond[slug, "replace_char"][op.chars[0]][op.chars[1]] += 1
        elif kind is AspectKind.AFFIX:
            self.events[slug, "p_affix"] += 1
            self.flat[slug, "affix_type"][detail.position] += 1
            self.flat[slug, f"{detail.position}_source"][detail.clean] += 1
            self.cond[slug, f"{detail.position}_target"][detail.clean][detail.noisy] += 1
        elif kind is AspectKind.PUNCTUATION:
            if detail.action == "insert":
                self.events[slug, "p_insert"] += 1
                self.flat[slug, "insert"][" ".join(tgt)] += 1
            elif detail.action == "remove":
                self.events[slug, "p_remove"] += len(src)
            else:
                self.events[slug, "p_replace"] += 1
                self.events[slug, "p_remove"] += len(src) - 1
                self.cond[slug, "replace"][src[0]][" ".join(tgt)] += 1
        elif kind is AspectKind.WHITESPACE:
            self.events[slug, "p_remove"] += detail.removed
            self.events[slug, "p_insert"] += detail.inserted
        elif kind is AspectKind.WORD_ORDER:
            self.events[slug, "p_reorder"] += 1
            self.flat[slug, "window"][str(detail.window)] += 1
        else:
            self.events[slug, "p_common"] += 1
            if len(src) <= MAX_PHRASE and len(tgt) <= MAX_PHRASE:
                key = " ".join(src)
                self.flat[slug, "source"][key] += 1
                self.cond[slug, "target"][key][" ".join(tgt)] += 1
        return 0

    def merge(self, other: "ProfileAccumulator") -> "ProfileAccumulator":
        out = ProfileAccumulator(self.lexicon)
        for acc in (self, other):
            out.units.update(acc.units)
            out.events.update(acc.events)
            for key, counter in acc.flat.items():
                out.flat[key].update(counter)
            for key, table in acc.cond.items():
                for cond, counter in table.items():
                    out.cond[key][cond].update(counter)
            out.observed |= acc.observed
            out.alphabet |= acc.alphabet
            out.rates.extend(acc.rates)
        return out

    @property
    def sentences(self) -> int:
        return len(self.rates)

    def finalize(self, name: str, language: str, role: ProfileRole | str) -> Profile:
        if not self.rates:
            raise ProfileError("no usable sentences to estimate a profile from")
        n = len(self.rates)
        mean = min(1.0, math.fsum(self.rates) / n)
        std = math.sqrt(math.fsum((r - mean) ** 2 for r in self.rates) / n)
        aspects = {}
        for kind in sorted(self.observed):
            slug = kind.slug
            triggers = {}
            for t in TRIGGERS[kind]:
                u = self.units[slug, t]
                triggers[t] = min(1.0, self.events[slug, t] / u) if u else 0.0
            dists = {}
            for dname, conditional in DISTRIBUTIONS[kind].items():
                if conditional:
                    table = self.cond.get((slug, dname))
                    if table:
                        dists[dname] = {k: _normalize(c) for k, c in table.items() if sum(c.values())}
                else:
                    counter = self.flat.get((slug, dname))
                    if counter and sum(counter.values()):
                        dists[dname] = _normalize(counter)
            aspects[slug] = {"triggers": triggers, "distributions": dists, "saturated": []}
        return Profile(
            name=name,
            language=language,
            role=ProfileRole.parse(role),
            error_amount=ErrorAmountDistribution(mean, std),
            aspects=aspects,
            lexicon=dict(sorted(self.lexicon.items())),
            alphabet=tuple(sorted(self.alphabet)),
        )


def _normalize(counter: Mapping[str, int]) -> dict[str, float]:
    total = sum(counter.values())
    return {k: counter[k] / total for k in sorted(counter) if counter[k]}


def estimate_profile(
    corpora: Iterable[M2Sentence],
    annotator: int = 0,
    name: str = "profile",
    language: str = "und",
    role: ProfileRole | str = ProfileRole.DEVELOPMENT,
    extra_words: Iterable[str] = (),
) -> Profile:
    """Estimate a profile by counting the errors of one annotator's corrections.

    Every correction is inverted into the error it fixes, classified into an
    aspect, and counted against the opportunities the clean sentence offered.
    """
    inverted = [invert_edits(s, annotator) for s in corpora]
    lexicon = build_lexicon((clean for clean, _ in inverted), extra_words)
    acc = ProfileAccumulator(lexicon)
    for clean, edits in inverted:
        acc.add(clean, edits)
    return acc.finalize(name, language, role)


def estimate_profile_from_files(
    paths: Sequence[str | Path],
    annotator: int = 0,
    name: str = "profile",
    language: str = "und",
    role: ProfileRole | str = ProfileRole.DEVELOPMENT,
    extra_words: Iterable[str] = (),
) -> Profile:
    """Same result as :func:`estimate_profile` over the concatenated files.

    Reads every file twice (lexicon first, then counts) so memory does not
    grow with corpus size.
    """
    def stream():
        for path in paths:
            for sentence in iter_m2_path(path):
                yield invert_edits(sentence, annotator)

    lexicon = build_lexicon((clean for clean, _ in stream()), extra_words)
    acc = ProfileAccumulator(lexicon)
    for clean, edits in stream():
        acc.add(clean, edits)
    return acc.finalize(name, language, role)


def corpus_error_level(profile: Profile) -> float:
    return profile.error_amount.mean


def scale_profile(profile: Profile, target_rate: float) -> Profile:
    """Rescale trigger probabilities so the corpus error level becomes ``target_rate``.

    Triggers pushed above 1 are clamped and listed under ``saturated``.
    """
    if isinstance(target_rate, bool) or not isinstance(target_rate, (int, float)) or not 0.0 <= target_rate <= 1.0:
        raise ProfileError(f"target rate must be in [0, 1], got {target_rate!r}")
    level = corpus_error_level(profile)
    if level == target_rate:
        return profile
    if level == 0.0:
        raise ProfileError(f"unscalable: profile {profile.name!r} has corpus error level 0")
    factor = target_rate / level
    aspects = {}
    for slug, block in profile.aspects.items():
        triggers = {}
        saturated = set(block["saturated"])
        for t, p in block["triggers"].items():
            scaled = p * factor
            if scaled > 1.0:
                scaled = 1.0
                saturated.add(t)
            triggers[t] = scaled
        aspects[slug] = {"triggers": triggers, "distributions": block["distributions"], "saturated": sorted(saturated)}
    return Profile(
        name=profile.name,
        language=profile.language,
        role=profile.role,
        error_amount=ErrorAmountDistribution(float(target_rate), profile.error_amount.std * factor),
        aspects=aspects,
        lexicon=profile.lexicon,
        alphabet=profile.alphabet,
    )


# -- persistence ----------------------------------------------------------------


def dumps_profile(profile: Profile) -> str:
    return json.dumps(profile.to_dict(), sort_keys=True, ensure_ascii=False, indent=1, allow_nan=False) + "\n"


def loads_profile(text: str) -> Profile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProfileValidationError("<root>", f"invalid JSON: {exc}") from None
    return Profile.from_dict(data)


def save_profile(profile: Profile, path: str | Path) -> None:
    Path(path).write_text(dumps_profile(profile), encoding="utf-8")


def load_profile(path: str | Path) -> Profile:
    try:
        text = Path(path).read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ProfileValidationError("<root>", f"invalid UTF-8: {exc}") from None
    return loads_profile(text)
