"""The eight error aspects: classification of observed edits and generation.

Both directions share one definition of the *units* each trigger probability
is counted over (:func:`count_units`), so a profile estimated from generated
text reproduces the probabilities it was generated with.

Generation works on a :class:`Draft`, a list of pieces that each map a clean
span to noisy tokens.  A piece is edited at most once; an inserted piece
locks its neighbours so edits never touch each other across an insertion.
To keep the per-unit rate of every trigger, the probability is spread over
the units still available: ``q = p * units / available``.
"""
from __future__ import annotations

import enum
import random
from collections import defaultdict
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Mapping, Sequence

from .m2 import Edit
from .text import (
    flip_case,
    has_diacritic,
    is_cased,
    is_punct_token,
    is_word,
    nfc,
    osa_distance,
    osa_ops,
    strip_char,
    strip_diacritics,
)

__all__ = [
    "AspectKind",
    "CharOpKind",
    "CharOp",
    "ClassifiedEdit",
    "DiacriticsDetail",
    "CasingDetail",
    "SpellingDetail",
    "AffixDetail",
    "PunctuationDetail",
    "WhitespaceDetail",
    "WordOrderDetail",
    "CommonOtherDetail",
    "AspectUnavailable",
    "TRIGGERS",
    "classify_edit",
    "classify_pair",
    "affix_split",
    "count_units",
    "strip_diacritics",
    "apply_aspect",
    "Draft",
    "GenerationContext",
]


class AspectKind(enum.IntEnum):
    DIACRITICS = 1
    CASING = 2
    SPELLING = 3
    AFFIX = 4
    PUNCTUATION = 5
    WHITESPACE = 6
    WORD_ORDER = 7
    COMMON_OTHER = 8

    @property
    def slug(self) -> str:
        return self.name.lower()

    @property
    def preserves_tokenization(self) -> bool:
        return self <= AspectKind.AFFIX

    @classmethod
    def parse(cls, value: "AspectKind | int | str") -> "AspectKind":
        if isinstance(value, AspectKind):
            return value
        if isinstance(value, int):
            return cls(value)
        text = str(value).strip().lower().replace("-", "_")
        if text.isdigit():
            return cls(int(text))
        aliases = {"suffix": "affix", "prefix": "affix", "order": "word_order", "common": "common_other",
                   "other": "common_other", "case": "casing"}
        text = aliases.get(text, text)
        try:
            return cls[text.upper()]
        except KeyError:
            raise ValueError(f"unknown aspect {value!r}") from None


# Trigger probabilities per aspect, in serialization order.
TRIGGERS: dict[AspectKind, tuple[str, ...]] = {
    AspectKind.DIACRITICS: ("p_sentence", "p_char"),
    AspectKind.CASING: ("p_first", "p_other"),
    AspectKind.SPELLING: ("p_word",),
    AspectKind.AFFIX: ("p_affix",),
    AspectKind.PUNCTUATION: ("p_insert", "p_remove", "p_replace"),
    AspectKind.WHITESPACE: ("p_remove", "p_insert"),
    AspectKind.WORD_ORDER: ("p_reorder",),
    AspectKind.COMMON_OTHER: ("p_common",),
}


class AspectUnavailable(KeyError):
    def __init__(self, kind: AspectKind):
        self.kind = kind
        super().__init__(f"aspect unavailable: {kind.slug} is not in the profile")

    def __str__(self):
        return self.args[0]


class CharOpKind(enum.Enum):
    INSERT = "insert"
    REMOVE = "remove"
    REPLACE = "replace"
    SWAP = "swap"
    WORD_CONFUSION = "confusion"


@dataclass(frozen=True)
class CharOp:
    kind: CharOpKind
    position: int = 0
    chars: str = ""
    target: str = ""


@dataclass(frozen=True)
class DiacriticsDetail:
    stripped: int


@dataclass(frozen=True)
class CasingDetail:
    first: int
    other: int


@dataclass(frozen=True)
class SpellingDetail:
    ops: tuple[CharOp, ...]

    @property
    def confusion(self) -> bool:
        return len(self.ops) == 1 and self.ops[0].kind is CharOpKind.WORD_CONFUSION


@dataclass(frozen=True)
class AffixDetail:
    position: str  # "suffix" or "prefix"
    clean: str
    noisy: str


@dataclass(frozen=True)
class PunctuationDetail:
    action: str  # "insert", "remove" or "replace"


@dataclass(frozen=True)
class WhitespaceDetail:
    removed: int
    inserted: int


@dataclass(frozen=True)
class WordOrderDetail:
    window: int


@dataclass(frozen=True)
class CommonOtherDetail:
    pass


_DETAIL_TYPES = {
    AspectKind.DIACRITICS: DiacriticsDetail,
    AspectKind.CASING: CasingDetail,
    AspectKind.SPELLING: SpellingDetail,
    AspectKind.AFFIX: AffixDetail,
    AspectKind.PUNCTUATION: PunctuationDetail,
    AspectKind.WHITESPACE: WhitespaceDetail,
    AspectKind.WORD_ORDER: WordOrderDetail,
    AspectKind.COMMON_OTHER: CommonOtherDetail,
}


@dataclass(frozen=True)
class ClassifiedEdit:
    edit: Edit
    kind: AspectKind
    detail: Any

    def __post_init__(self):
        if not isinstance(self.detail, _DETAIL_TYPES[self.kind]):
            raise TypeError(f"{type(self.detail).__name__} is not a {self.kind.slug} detail")


# -- classification -----------------------------------------------------------

MAX_AFFIX = 4
MAX_SPELLING_DISTANCE = 2
MAX_PHRASE = 3


def _diacritic_strips(clean: str, noisy: str) -> int | None:
    """Number of characters stripped if ``noisy`` is ``clean`` with some diacritics removed."""
    if len(clean) != len(noisy):
        return None
    count = 0
    for c, n in zip(clean, noisy):
        if c == n:
            continue
        if has_diacritic(c) and strip_char(c) == n:
            count += 1
        else:
            return None
    return count


def _case_flips(clean: str, noisy: str) -> tuple[int, int] | None:
    if len(clean) != len(noisy):
        return None
    first = other = 0
    for i, (c, n) in enumerate(zip(clean, noisy)):
        if c == n:
            continue
        if is_cased(c) and flip_case(c) == n:
            if i == 0:
                first += 1
            else:
                other += 1
        else:
            return None
    return first, other


def _boundaries(tokens: Sequence[str]) -> set[int]:
    out, pos = set(), 0
    for tok in tokens[:-1]:
        pos += len(tok)
        out.add(pos)
    return out


def affix_split(clean: str, noisy: str) -> AffixDetail | None:
    """Decompose a word pair into a suffix (or failing that prefix) replacement."""
    shorter = min(len(clean), len(noisy))
    lcp = 0
    while lcp < shorter and clean[lcp] == noisy[lcp]:
        lcp += 1
    if lcp >= 2 and 2 * lcp >= shorter:
        cs, ns = clean[lcp:], noisy[lcp:]
        if len(cs) <= MAX_AFFIX and len(ns) <= MAX_AFFIX and cs != ns:
            return AffixDetail("suffix", cs, ns)
    lcs = 0
    while lcs < shorter and clean[-1 - lcs] == noisy[-1 - lcs]:
        lcs += 1
    if lcs >= 2 and 2 * lcs >= shorter:
        cp, np_ = clean[: len(clean) - lcs], noisy[: len(noisy) - lcs]
        if len(cp) <= MAX_AFFIX and len(np_) <= MAX_AFFIX and cp != np_:
            return AffixDetail("prefix", cp, np_)
    return None


def _char_ops(clean: str, noisy: str) -> tuple[CharOp, ...]:
    ops = []
    for op in osa_ops(clean, noisy):
        if op[0] == "insert":
            ops.append(CharOp(CharOpKind.INSERT, op[1], op[2]))
        elif op[0] == "remove":
            ops.append(CharOp(CharOpKind.REMOVE, op[1], op[2]))
        elif op[0] == "replace":
            ops.append(CharOp(CharOpKind.REPLACE, op[1], op[2] + op[3]))
        else:
            ops.append(CharOp(CharOpKind.SWAP, op[1], op[2]))
    return tuple(ops)


def classify_pair(clean: Sequence[str], noisy: Sequence[str], lexicon: Mapping[str, Any] | Iterable[str] = ()):
    """Classify the error turning the ``clean`` tokens into the ``noisy`` ones.

    Returns ``(kind, detail)``.  The first matching rule wins: diacritics,
    casing, whitespace, punctuation, affix, word confusion, character
    operations, word order, and common-other as the fallback.
    """
    clean, noisy = tuple(clean), tuple(noisy)
    same_len = len(clean) == len(noisy) and len(clean) > 0

    if same_len:
        strips = [_diacritic_strips(c, n) for c, n in zip(clean, noisy)]
        if all(s is not None for s in strips) and sum(strips) > 0:
            return AspectKind.DIACRITICS, DiacriticsDetail(sum(strips))
        flips = [_case_flips(c, n) for c, n in zip(clean, noisy)]
        if all(f is not None for f in flips) and any(f != (0, 0) for f in flips):
            return AspectKind.CASING, CasingDetail(sum(f[0] for f in flips), sum(f[1] for f in flips))

    if clean and noisy and clean != noisy and "".join(clean) == "".join(noisy):
        bc, bn = _boundaries(clean), _boundaries(noisy)
        return AspectKind.WHITESPACE, WhitespaceDetail(len(bc - bn), len(bn - bc))

    if (clean or noisy) and all(is_punct_token(t) for t in clean + noisy):
        action = "insert" if not clean else "remove" if not noisy else "replace"
        return AspectKind.PUNCTUATION, PunctuationDetail(action)

    if len(clean) == 1 and len(noisy) == 1 and clean != noisy:
        c, n = clean[0], noisy[0]
        affix = affix_split(c, n)
        if affix is not None:
            return AspectKind.AFFIX, affix
        if osa_distance(c, n, MAX_SPELLING_DISTANCE) <= MAX_SPELLING_DISTANCE:
            if n in lexicon:
                return AspectKind.SPELLING, SpellingDetail((CharOp(CharOpKind.WORD_CONFUSION, target=n),))
            return AspectKind.SPELLING, SpellingDetail(_char_ops(c, n))

    if 2 <= len(clean) <= 4 and len(noisy) == len(clean) and clean != noisy and sorted(clean) == sorted(noisy):
        return AspectKind.WORD_ORDER, WordOrderDetail(len(clean))

    return AspectKind.COMMON_OTHER, CommonOtherDetail()


def classify_edit(clean_tokens: Sequence[str], edit: Edit, lexicon: Mapping[str, Any] | Iterable[str] = ()) -> ClassifiedEdit:
    if edit.end > len(clean_tokens):
        raise ValueError(f"edit ({edit.start}, {edit.end}) exceeds {len(clean_tokens)} clean tokens")
    clean = tuple(nfc(t) for t in clean_tokens[edit.start : edit.end])
    noisy = tuple(nfc(t) for t in edit.replacement)
    kind, detail = classify_pair(clean, noisy, lexicon)
    return ClassifiedEdit(edit, kind, detail)


# -- units ------------------------------------------------------------------


def count_units(clean_tokens: Sequence[str]) -> dict[AspectKind, dict[str, int]]:
    """How many opportunities each trigger has in a clean sentence."""
    n = len(clean_tokens)
    n_diac = sum(has_diacritic(c) for t in clean_tokens for c in t)
    first = sum(1 for t in clean_tokens if is_cased(t[0]))
    other = sum(1 for t in clean_tokens for c in t[1:] if is_cased(c))
    words = sum(1 for t in clean_tokens if is_word(t))
    punct = sum(1 for t in clean_tokens if is_punct_token(t))
    long_tokens = sum(1 for t in clean_tokens if len(t) >= 2)
    return {
        AspectKind.DIACRITICS: {"p_sentence": int(n_diac >= 2), "p_char": n_diac},
        AspectKind.CASING: {"p_first": first, "p_other": other},
        AspectKind.SPELLING: {"p_word": words},
        AspectKind.AFFIX: {"p_affix": words},
        AspectKind.PUNCTUATION: {"p_insert": n + 1, "p_remove": punct, "p_replace": punct},
        AspectKind.WHITESPACE: {"p_remove": max(n - 1, 0), "p_insert": long_tokens},
        AspectKind.WORD_ORDER: {"p_reorder": int(n >= 2)},
        AspectKind.COMMON_OTHER: {"p_common": n},
    }


# -- generation state --------------------------------------------------------


class _Piece:
    __slots__ = ("start", "end", "tokens", "kind", "locked")

    def __init__(self, start: int, end: int, tokens: list[str], kind: AspectKind | None = None):
        self.start = start
        self.end = end
        self.tokens = tokens
        self.kind = kind
        self.locked = False

    @property
    def editable(self) -> bool:
        return self.kind is None and not self.locked

    def __repr__(self):
        return f"_Piece({self.start}, {self.end}, {self.tokens!r}, {self.kind}, locked={self.locked})"


class Draft:
    """Clean tokens being noised, with enough bookkeeping to emit gold edits."""

    def __init__(self, clean_tokens: Sequence[str]):
        self.clean = tuple(nfc(t) for t in clean_tokens)
        self.pieces = [_Piece(i, i + 1, [t]) for i, t in enumerate(self.clean)]
        self._units: dict | None = None

    @property
    def units(self) -> dict[AspectKind, dict[str, int]]:
        if self._units is None:
            self._units = count_units(self.clean)
        return self._units

    def tokens(self) -> tuple[str, ...]:
        return tuple(t for p in self.pieces for t in p.tokens)

    def editable(self) -> list[_Piece]:
        return [p for p in self.pieces if p.editable]

    def gap_ok(self, right: _Piece | None) -> bool:
        """Whether an insertion just before ``right`` (or at the end) keeps edits apart."""
        idx = len(self.pieces) if right is None else self.pieces.index(right)
        if idx > 0 and self.pieces[idx - 1].kind is not None:
            return False
        if right is not None and right.kind is not None:
            return False
        return True

    def gaps(self) -> list[_Piece | None]:
        return [p for p in self.pieces + [None] if self.gap_ok(p)]

    def replace(self, piece: _Piece, tokens: list[str], kind: AspectKind) -> None:
        piece.tokens = tokens
        piece.kind = kind

    def merge(self, pieces: Sequence[_Piece], tokens: list[str], kind: AspectKind) -> None:
        idx = self.pieces.index(pieces[0])
        merged = _Piece(pieces[0].start, pieces[-1].end, tokens, kind)
        self.pieces[idx : idx + len(pieces)] = [merged]
        for p in pieces:
            p.kind = kind  # consumed; stale references must not look editable

    def insert(self, right: _Piece | None, tokens: list[str], kind: AspectKind) -> None:
        idx = len(self.pieces) if right is None else self.pieces.index(right)
        pos = self.pieces[idx - 1].end if idx > 0 else 0
        self.pieces.insert(idx, _Piece(pos, pos, tokens, kind))
        if idx > 0:
            self.pieces[idx - 1].locked = True
        if right is not None:
            right.locked = True

    def gold_edits(self, annotator: int = 0) -> tuple[Edit, ...]:
        """Edits over the noisy tokens that restore the clean sentence."""
        edits: list[Edit] = []
        pos = 0
        for p in self.pieces:
            if p.kind is not None:
                clean = self.clean[p.start : p.end]
                e = Edit(pos, pos + len(p.tokens), clean, p.kind.name, annotator)
                prev = edits[-1] if edits else None
                if prev is not None and prev.is_insertion and e.is_insertion and prev.start == e.start:
                    e = Edit(pos, pos, prev.replacement + clean, prev.error_type, annotator)
                    edits.pop()
                edits.append(e)
            pos += len(p.tokens)
        return tuple(edits)


def _sample(rng: random.Random, dist: Mapping[str, float]) -> str:
    keys = list(dist)
    return rng.choices(keys, weights=[dist[k] for k in keys])[0]


def _spread(p: float, units: int, available: int) -> float:
    if available <= 0 or p <= 0.0:
        return 0.0
    return min(1.0, p * units / available)


class GenerationContext:
    """Profile-derived lookups that do not depend on trigger probabilities."""

    def __init__(self, stats):
        self.aspects: Mapping[str, Mapping] = stats.aspects
        self.lexicon: Mapping[str, int] = stats.lexicon
        self.letters = [c for c in stats.alphabet if c.isalpha()]
        self._delete_index: dict[str, list[str]] | None = None
        self._neighbors: dict[str, tuple[list[str], list[int]]] = {}
        self._affix: dict[str, tuple[list[str], list[float]]] = {}
        self._common: tuple[dict, list] | None = None

    def block(self, kind: AspectKind) -> Mapping:
        try:
            return self.aspects[kind.slug]
        except KeyError:
            raise AspectUnavailable(kind) from None

    # word confusion --------------------------------------------------------

    @staticmethod
    def _deletes(word: str, depth: int) -> set[str]:
        out = {word}
        frontier = {word}
        for _ in range(depth):
            nxt = set()
            for w in frontier:
                for i in range(len(w)):
                    nxt.add(w[:i] + w[i + 1 :])
            out |= nxt
            frontier = nxt
        return out

    def neighbors(self, word: str) -> tuple[list[str], list[int]]:
        """Lexicon words that would classify as a word confusion of ``word``."""
        cached = self._neighbors.get(word)
        if cached is not None:
            return cached
        if self._delete_index is None:
            index: dict[str, list[str]] = defaultdict(list)
            for w in sorted(self.lexicon):
                for d in self._deletes(w, MAX_SPELLING_DISTANCE):
                    index[d].append(w)
            self._delete_index = dict(index)
        found = set()
        for d in self._deletes(word, MAX_SPELLING_DISTANCE):
            found.update(self._delete_index.get(d, ()))
        found.discard(word)
        words = []
        for w in sorted(found):
            kind, detail = classify_pair((word,), (w,), self.lexicon)
            if kind is AspectKind.SPELLING and detail.confusion:
                words.append(w)
        result = (words, [self.lexicon[w] for w in words])
        self._neighbors[word] = result
        return result

    # affixes -------------------------------------------------------------

    def affix_candidates(self, word: str) -> tuple[list[str], list[float]]:
        cached = self._affix.get(word)
        if cached is not None:
            return cached
        dist = self.aspects.get(AspectKind.AFFIX.slug, {}).get("distributions", {})
        weights: dict[str, float] = defaultdict(float)
        for position in ("suffix", "prefix"):
            p_type = dist.get("affix_type", {}).get(position, 0.0)
            sources = dist.get(f"{position}_source", {})
            targets = dist.get(f"{position}_target", {})
            if not p_type:
                continue
            for k in range(0, min(MAX_AFFIX, len(word)) + 1):
                src = (word[len(word) - k :] if k else "") if position == "suffix" else word[:k]
                if src not in targets:
                    continue
                stem = word[: len(word) - k] if position == "suffix" else word[k:]
                for tgt, p_tgt in targets[src].items():
                    noisy = stem + tgt if position == "suffix" else tgt + stem
                    if not noisy or noisy == word or any(ch.isspace() for ch in noisy):
                        continue
                    if classify_pair((word,), (noisy,))[0] is AspectKind.AFFIX:
                        weights[noisy] += p_type * sources.get(src, 0.0) * p_tgt
        words = [w for w in sorted(weights) if weights[w] > 0]
        result = (words, [weights[w] for w in words])
        self._affix[word] = result
        return result

    # common phrases --------------------------------------------------------

    def common_index(self) -> tuple[dict, list]:
        if self._common is None:
            dist = self.aspects.get(AspectKind.COMMON_OTHER.slug, {}).get("distributions", {})
            sources = dist.get("source", {})
            targets = dist.get("target", {})
            by_first: dict[str, list] = defaultdict(list)
            insertions = []
            for src in sorted(targets):
                src_tokens = tuple(src.split()) if src else ()
                for tgt, p_tgt in sorted(targets[src].items()):
                    weight = sources.get(src, 0.0) * p_tgt
                    if weight <= 0:
                        continue
                    entry = (src_tokens, tgt.split() if tgt else [], weight)
                    if src_tokens:
                        by_first[src_tokens[0]].append(entry)
                    else:
                        insertions.append(entry)
            self._common = (dict(by_first), insertions)
        return self._common


# -- operators ----------------------------------------------------------------


def _diacritics(draft: Draft, block, ctx: GenerationContext, rng: random.Random, scale: float) -> None:
    trig = block["triggers"]
    units = draft.units[AspectKind.DIACRITICS]
    pieces = [p for p in draft.editable() if any(has_diacritic(c) for c in p.tokens[0])]
    if not pieces:
        return
    if units["p_sentence"] and rng.random() < min(1.0, trig["p_sentence"] * scale):
        for p in pieces:
            tok = p.tokens[0]
            draft.replace(p, [strip_diacritics(tok, [has_diacritic(c) for c in tok])], AspectKind.DIACRITICS)
        return
    available = sum(has_diacritic(c) for p in pieces for c in p.tokens[0])
    q = _spread(trig["p_char"] * scale, units["p_char"], available)
    if q <= 0.0:
        return
    for p in pieces:
        tok = p.tokens[0]
        mask = [has_diacritic(c) and rng.random() < q for c in tok]
        if any(mask):
            draft.replace(p, [strip_diacritics(tok, mask)], AspectKind.DIACRITICS)


def _casing(draft: Draft, block, ctx: GenerationContext, rng: random.Random, scale: float) -> None:
    trig = block["triggers"]
    units = draft.units[AspectKind.CASING]
    pieces = draft.editable()
    qf = _spread(trig["p_first"] * scale, units["p_first"], sum(is_cased(p.tokens[0][0]) for p in pieces))
    qo = _spread(
        trig["p_other"] * scale, units["p_other"], sum(is_cased(c) for p in pieces for c in p.tokens[0][1:])
    )
    if qf <= 0.0 and qo <= 0.0:
        return
    for p in pieces:
        chars = list(p.tokens[0])
        changed = False
        for i, c in enumerate(chars):
            if is_cased(c) and rng.random() < (qf if i == 0 else qo):
                chars[i] = flip_case(c)
                changed = True
        if changed:
            draft.replace(p, ["".join(chars)], AspectKind.CASING)


def _apply_char_op(word: str, op: str, block, ctx: GenerationContext, rng: random.Random) -> str | None:
    dist = block.get("distributions", {})
    if op == "insert":
        ins = dist.get("insert_char")
        ch = _sample(rng, ins) if ins else (rng.choice(ctx.letters) if ctx.letters else None)
        if ch is None:
            return None
        pos = rng.randint(0, len(word))
        return word[:pos] + ch + word[pos:]
    if op == "remove":
        if len(word) < 2:
            return None
        pos = rng.randrange(len(word))
        return word[:pos] + word[pos + 1 :]
    if op == "replace":
        pos = rng.randrange(len(word))
        row = dist.get("replace_char", {}).get(word[pos])
        if row:
            ch = _sample(rng, row)
        else:
            choices = [c for c in ctx.letters if c != word[pos]]
            if not choices:
                return None
            ch = rng.choice(choices)
        return word[:pos] + ch + word[pos + 1 :]
    if op == "swap":
        spots = [i for i in range(len(word) - 1) if word[i] != word[i + 1]]
        if not spots:
            return None
        i = rng.choice(spots)
        return word[:i] + word[i + 1] + word[i] + word[i + 2 :]
    return None


_SPELLING_ATTEMPTS = 8


def _misspell(word: str, block, ctx: GenerationContext, rng: random.Random) -> str | None:
    dist = block.get("distributions", {})
    ops = dist.get("op", {})
    if not ops:
        return None
    char_ops = {k: v for k, v in ops.items() if k != CharOpKind.WORD_CONFUSION.value and v > 0}
    n_ops = dist.get("n_ops", {"1": 1.0})
    for _ in range(_SPELLING_ATTEMPTS):
        op = _sample(rng, ops)
        if op == CharOpKind.WORD_CONFUSION.value:
            words, weights = ctx.neighbors(word)
            if not words:
                continue
            return rng.choices(words, weights=weights)[0]
        out: str | None = word
        for k in range(int(_sample(rng, n_ops))):
            if k > 0:
                op = _sample(rng, char_ops) if char_ops else op
            out = _apply_char_op(out, op, block, ctx, rng)
            if out is None:
                break
        if not out or out == word:
            continue
        kind, detail = classify_pair((word,), (out,), ctx.lexicon)
        if kind is AspectKind.SPELLING:
            return out
    return None


def _spelling(draft: Draft, block, ctx: GenerationContext, rng: random.Random, scale: float) -> None:
    pieces = [p for p in draft.editable() if is_word(p.tokens[0])]
    q = _spread(block["triggers"]["p_word"] * scale, draft.units[AspectKind.SPELLING]["p_word"], len(pieces))
    for p in pieces:
        if q > 0.0 and rng.random() < q:
            out = _misspell(p.tokens[0], block, ctx, rng)
            if out is not None:
                draft.replace(p, [out], AspectKind.SPELLING)


def _affix(draft: Draft, block, ctx: GenerationContext, rng: random.Random, scale: float) -> None:
    p_affix = block["triggers"]["p_affix"] * scale
    if p_affix <= 0.0:
        return
    pieces = []
    for p in draft.editable():
        if is_word(p.tokens[0]):
            words, weights = ctx.affix_candidates(p.tokens[0])
            if words:
                pieces.append((p, words, weights))
    q = _spread(p_affix, draft.units[AspectKind.AFFIX]["p_affix"], len(pieces))
    for p, words, weights in pieces:
        if rng.random() < q:
            draft.replace(p, [rng.choices(words, weights=weights)[0]], AspectKind.AFFIX)


def _punctuation(draft: Draft, block, ctx: GenerationContext, rng: random.Random, scale: float) -> None:
    trig = block["triggers"]
    units = draft.units[AspectKind.PUNCTUATION]
    dist = block.get("distributions", {})
    replace_table = dist.get("replace", {})
    pieces = [p for p in draft.editable() if is_punct_token(p.tokens[0])]
    q_remove = _spread(trig["p_remove"] * scale, units["p_remove"], len(pieces))
    q_replace = _spread(
        trig["p_replace"] * scale, units["p_replace"], sum(1 for p in pieces if p.tokens[0] in replace_table)
    )
    for p in pieces:
        if q_remove <= 0.0 and q_replace <= 0.0:
            break
        u = rng.random()
        if u < q_remove:
            draft.replace(p, [], AspectKind.PUNCTUATION)
        elif p.tokens[0] in replace_table and u < q_remove + q_replace:
            draft.replace(p, _sample(rng, replace_table[p.tokens[0]]).split(), AspectKind.PUNCTUATION)

    inserts = dist.get("insert")
    if not inserts or trig["p_insert"] <= 0.0:
        return
    gaps = draft.gaps()
    q = _spread(trig["p_insert"] * scale, units["p_insert"], len(gaps))
    for right in gaps:
        if rng.random() < q and draft.gap_ok(right):
            draft.insert(right, _sample(rng, inserts).split(), AspectKind.PUNCTUATION)


def _whitespace(draft: Draft, block, ctx: GenerationContext, rng: random.Random, scale: float) -> None:
    trig = block["triggers"]
    units = draft.units[AspectKind.WHITESPACE]
    if trig["p_remove"] > 0.0:
        pairs = [(a, b) for a, b in zip(draft.pieces, draft.pieces[1:]) if a.editable and b.editable]
        q = _spread(trig["p_remove"] * scale, units["p_remove"], len(pairs))
        for a, b in pairs:
            if rng.random() < q and a.editable and b.editable:
                draft.merge([a, b], [a.tokens[0] + b.tokens[0]], AspectKind.WHITESPACE)
    if trig["p_insert"] > 0.0:
        pieces = [p for p in draft.editable() if len(p.tokens[0]) >= 2]
        q = _spread(trig["p_insert"] * scale, units["p_insert"], len(pieces))
        for p in pieces:
            if rng.random() < q:
                tok = p.tokens[0]
                k = rng.randint(1, len(tok) - 1)
                draft.replace(p, [tok[:k], tok[k:]], AspectKind.WHITESPACE)


_SHUFFLE_ATTEMPTS = 20


def _word_order(draft: Draft, block, ctx: GenerationContext, rng: random.Random, scale: float) -> None:
    if not draft.units[AspectKind.WORD_ORDER]["p_reorder"]:
        return
    if rng.random() >= min(1.0, block["triggers"]["p_reorder"] * scale):
        return
    windows = block.get("distributions", {}).get("window", {"2": 1.0})
    size = int(_sample(rng, windows))
    pieces = draft.pieces
    starts = []
    for i in range(len(pieces) - size + 1):
        window = pieces[i : i + size]
        if all(p.editable for p in window) and window[0].tokens[0] != window[-1].tokens[0]:
            starts.append(i)
    if not starts:
        return
    window = pieces[rng.choice(starts) : ][:size]
    orig = [p.tokens[0] for p in window]
    for _ in range(_SHUFFLE_ATTEMPTS):
        perm = orig[:]
        rng.shuffle(perm)
        if perm[0] != orig[0] and perm[-1] != orig[-1]:
            draft.merge(window, perm, AspectKind.WORD_ORDER)
            return


def _common_candidates(draft: Draft, i: int, by_first, insertions) -> list:
    pieces = draft.pieces
    piece = pieces[i]
    out = []
    for src, tgt, weight in by_first.get(piece.tokens[0], ()):
        window = pieces[i : i + len(src)]
        if len(window) == len(src) and all(p.editable and p.tokens[0] == t for p, t in zip(window, src)):
            out.append((src, tgt, weight))
    if insertions and (i == 0 or pieces[i - 1].kind is None):
        out.extend(insertions)
    return out


def _common_other(draft: Draft, block, ctx: GenerationContext, rng: random.Random, scale: float) -> None:
    p_common = block["triggers"]["p_common"] * scale
    if p_common <= 0.0:
        return
    by_first, insertions = ctx.common_index()
    if not by_first and not insertions:
        return
    targets = []
    for i, p in enumerate(draft.pieces):
        if p.kind is None and (p.editable or insertions) and _common_candidates(draft, i, by_first, insertions):
            targets.append(p)
    q = _spread(p_common, draft.units[AspectKind.COMMON_OTHER]["p_common"], len(targets))
    for p in targets:
        if p.kind is not None or rng.random() >= q:
            continue
        i = draft.pieces.index(p)
        cands = _common_candidates(draft, i, by_first, insertions)
        if not p.editable:
            cands = [c for c in cands if not c[0]]
        if not cands:
            continue
        src, tgt, _ = rng.choices(cands, weights=[c[2] for c in cands])[0]
        if src:
            draft.merge(draft.pieces[i : i + len(src)], list(tgt), AspectKind.COMMON_OTHER)
        else:
            draft.insert(p, list(tgt), AspectKind.COMMON_OTHER)


OPERATORS: dict[AspectKind, Callable] = {
    AspectKind.DIACRITICS: _diacritics,
    AspectKind.CASING: _casing,
    AspectKind.SPELLING: _spelling,
    AspectKind.AFFIX: _affix,
    AspectKind.PUNCTUATION: _punctuation,
    AspectKind.WHITESPACE: _whitespace,
    AspectKind.WORD_ORDER: _word_order,
    AspectKind.COMMON_OTHER: _common_other,
}


def apply_to_draft(kind: AspectKind, draft: Draft, ctx: GenerationContext, rng: random.Random, scale: float = 1.0) -> None:
    OPERATORS[kind](draft, ctx.block(kind), ctx, rng, scale)


def apply_aspect(
    kind: AspectKind | int | str,
    tokens: Sequence[str],
    stats,
    rng: random.Random,
    scale: float = 1.0,
) -> list[str]:
    """Apply one aspect to ``tokens`` using the statistics of a profile.

    ``stats`` is a profile (anything with ``aspects``, ``lexicon`` and
    ``alphabet``).  ``scale`` multiplies every trigger probability.
    Raises :class:`AspectUnavailable` when the profile lacks the aspect.
    """
    kind = AspectKind.parse(kind)
    ctx = stats if isinstance(stats, GenerationContext) else GenerationContext(stats)
    ctx.block(kind)
    draft = Draft(tokens)
    apply_to_draft(kind, draft, ctx, rng, scale)
    return list(draft.tokens())
