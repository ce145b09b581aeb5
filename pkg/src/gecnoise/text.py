"""Character-level helpers shared by classification, generation and metrics."""
from __future__ import annotations

import re
import unicodedata
from functools import lru_cache
from typing import Iterable, Sequence

__all__ = [
    "nfc",
    "strip_diacritics",
    "strip_char",
    "has_diacritic",
    "flip_case",
    "is_cased",
    "is_punct_char",
    "is_punct_token",
    "is_word",
    "osa_distance",
    "osa_ops",
    "tokenize_plain",
    "detokenize",
]


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


@lru_cache(maxsize=65536)
def strip_char(ch: str) -> str:
    """``ch`` without combining marks; lone marks are returned unchanged."""
    base = "".join(c for c in unicodedata.normalize("NFD", ch) if not unicodedata.combining(c))
    return base if base else ch


@lru_cache(maxsize=65536)
def has_diacritic(ch: str) -> bool:
    """True for a precomposed character that strips to a different single character."""
    base = strip_char(ch)
    return len(base) == 1 and base != ch


def strip_diacritics(text: str, per_char_mask: Sequence[bool] | None = None) -> str:
    """Remove diacritics from ``text``.

    The input is NFC-normalized first; ``per_char_mask`` indexes characters of
    that normalized form and limits stripping to the selected positions.
    """
    text = nfc(text)
    if per_char_mask is not None and len(per_char_mask) != len(text):
        raise ValueError(f"mask length {len(per_char_mask)} != text length {len(text)}")
    out = []
    attached = False  # marks after a stripped base go too, or NFC would recompose them
    for i, ch in enumerate(text):
        if unicodedata.combining(ch):
            if not attached:
                out.append(ch)
            continue
        attached = per_char_mask is None or per_char_mask[i]
        out.append(strip_char(ch) if attached else ch)
    return nfc("".join(out))


def flip_case(ch: str) -> str:
    if ch.isupper():
        return ch.lower()
    return ch.upper()


@lru_cache(maxsize=65536)
def is_cased(ch: str) -> bool:
    """A character whose case flip is a different single character and flips back."""
    f = flip_case(ch)
    return len(f) == 1 and f != ch and flip_case(f) == ch


@lru_cache(maxsize=65536)
def is_punct_char(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def is_punct_token(tok: str) -> bool:
    return bool(tok) and all(is_punct_char(c) for c in tok)


def is_word(tok: str) -> bool:
    return any(c.isalpha() for c in tok)


# -- optimal string alignment (restricted Damerau-Levenshtein) ----------------


def _osa_table(a: str, b: str) -> list[list[int]]:
    n, m = len(a), len(b)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        d[i][0] = i
    for j in range(m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        ai = a[i - 1]
        row, prev = d[i], d[i - 1]
        for j in range(1, m + 1):
            cost = 0 if ai == b[j - 1] else 1
            v = min(prev[j] + 1, row[j - 1] + 1, prev[j - 1] + cost)
            if i > 1 and j > 1 and ai == b[j - 2] and a[i - 2] == b[j - 1] and ai != b[j - 1]:
                v = min(v, d[i - 2][j - 2] + 1)
            row[j] = v
    return d


def osa_distance(a: str, b: str, limit: int | None = None) -> int:
    """Damerau-Levenshtein distance with adjacent transpositions (OSA variant).

    With ``limit`` the result is only exact up to ``limit``; anything larger
    is reported as ``limit + 1``.
    """
    if limit is not None and abs(len(a) - len(b)) > limit:
        return limit + 1
    dist = _osa_table(a, b)[len(a)][len(b)]
    if limit is not None and dist > limit:
        return limit + 1
    return dist


def osa_ops(a: str, b: str) -> list[tuple]:
    """Character operations turning ``a`` into ``b`` along one optimal path.

    Returns tuples ``("insert", pos, char)``, ``("remove", pos, char)``,
    ``("replace", pos, old, new)`` or ``("swap", pos, pair)`` with positions
    in ``a``.  Ties prefer match/replace, then swap, then remove, then insert.
    """
    d = _osa_table(a, b)
    i, j = len(a), len(b)
    ops: list[tuple] = []
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            cost = 0 if a[i - 1] == b[j - 1] else 1
            if d[i][j] == d[i - 1][j - 1] + cost:
                if cost:
                    ops.append(("replace", i - 1, a[i - 1], b[j - 1]))
                i, j = i - 1, j - 1
                continue
            if (
                i > 1 and j > 1 and a[i - 1] == b[j - 2] and a[i - 2] == b[j - 1]
                and d[i][j] == d[i - 2][j - 2] + 1
            ):
                ops.append(("swap", i - 2, a[i - 2 : i]))
                i, j = i - 2, j - 2
                continue
        if i > 0 and d[i][j] == d[i - 1][j] + 1:
            ops.append(("remove", i - 1, a[i - 1]))
            i -= 1
        else:
            ops.append(("insert", i, b[j - 1]))
            j -= 1
    ops.reverse()
    return ops


# -- plain-text tokenization --------------------------------------------------

# Frozen: changing it changes every measured rate on plain text.
_TOKEN_RE = re.compile(r"\w+(?:['’-]\w+)*|[^\w\s]")

_NO_SPACE_BEFORE = set(".,;:?!)]}…%")
_NO_SPACE_AFTER = set("([{")


def tokenize_plain(text: str) -> list[str]:
    """Split on whitespace and peel punctuation off words."""
    return _TOKEN_RE.findall(nfc(text))


def detokenize(tokens: Iterable[str]) -> str:
    out: list[str] = []
    glue = True
    for tok in tokens:
        if out and not glue and not (tok and all(c in _NO_SPACE_BEFORE for c in tok)):
            out.append(" ")
        out.append(tok)
        glue = bool(tok) and all(c in _NO_SPACE_AFTER for c in tok)
    return "".join(out)
