"""Measure noise by aligning clean and noisy tokens.

This is deliberately independent of the generator's own bookkeeping: it only
sees the two token sequences.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, Sequence

from .text import nfc

__all__ = [
    "AlignmentReport",
    "LineCountMismatch",
    "align_tokens",
    "edit_distance",
    "measure_corpus",
    "REPORT_KEYS",
]

REPORT_KEYS = (
    "sentences",
    "tokens",
    "matches",
    "substitutions",
    "insertions",
    "deletions",
    "edited_tokens",
    "mean_rate",
    "std_rate",
)


class LineCountMismatch(ValueError):
    def __init__(self, clean: int, noisy: int):
        self.clean = clean
        self.noisy = noisy
        super().__init__(f"line count mismatch: {clean} clean lines vs {noisy} noisy lines")


@dataclass(frozen=True)
class AlignmentReport:
    """Alignment counts and token-edit rates for one sentence or a corpus.

    ``tokens`` counts clean tokens; ``edited_tokens`` charges each contiguous
    non-matching block ``max(clean tokens in block, 1)``.  For a single
    sentence ``mean_rate`` is its rate and ``std_rate`` is 0.
    """

    sentences: int
    tokens: int
    matches: int
    substitutions: int
    insertions: int
    deletions: int
    edited_tokens: int
    mean_rate: float
    std_rate: float

    @property
    def rate(self) -> float:
        return self.mean_rate

    @property
    def distance(self) -> int:
        return self.substitutions + self.insertions + self.deletions

    def to_dict(self) -> dict:
        return asdict(self)

    def format(self) -> str:
        return "\n".join(
            [
                f"sentences: {self.sentences}",
                f"clean tokens: {self.tokens}",
                f"matches: {self.matches}",
                f"substitutions: {self.substitutions}",
                f"insertions: {self.insertions}",
                f"deletions: {self.deletions}",
                f"edited tokens: {self.edited_tokens}",
                f"mean token-edit rate: {self.mean_rate:.4f} ({100 * self.mean_rate:.1f}%)",
                f"std token-edit rate: {self.std_rate:.4f}",
            ]
        )


def _table(a: Sequence[str], b: Sequence[str]) -> list[list[int]]:
    n, m = len(a), len(b)
    d = [list(range(m + 1))] + [[i] + [0] * m for i in range(1, n + 1)]
    for i in range(1, n + 1):
        ai, row, prev = a[i - 1], d[i], d[i - 1]
        for j in range(1, m + 1):
            row[j] = min(prev[j] + 1, row[j - 1] + 1, prev[j - 1] + (ai != b[j - 1]))
    return d


def edit_distance(a: Sequence[str], b: Sequence[str]) -> int:
    """Unit-cost Levenshtein distance between token sequences."""
    return _table(a, b)[len(a)][len(b)]


def align_tokens(clean_tokens: Sequence[str], noisy_tokens: Sequence[str]) -> AlignmentReport:
    """Minimum-cost alignment of two token sequences.

    The backtrace prefers match/substitution, then deletion, then insertion.
    """
    a = [nfc(t) for t in clean_tokens]
    b = [nfc(t) for t in noisy_tokens]
    d = _table(a, b)
    i, j = len(a), len(b)
    ops = []
    while i > 0 or j > 0:
        if i > 0 and j > 0 and d[i][j] == d[i - 1][j - 1] + (a[i - 1] != b[j - 1]):
            ops.append("M" if a[i - 1] == b[j - 1] else "S")
            i, j = i - 1, j - 1
        elif i > 0 and d[i][j] == d[i - 1][j] + 1:
            ops.append("D")
            i -= 1
        else:
            ops.append("I")
            j -= 1
    ops.reverse()

    edited = 0
    in_block = False
    clean_in_block = 0
    for op in ops + ["M"]:
        if op == "M":
            if in_block:
                edited += max(clean_in_block, 1)
            in_block, clean_in_block = False, 0
        else:
            in_block = True
            if op != "I":
                clean_in_block += 1
    n = len(a)
    if n == 0:
        rate = 1.0 if b else 0.0
    else:
        rate = min(1.0, edited / n)
    return AlignmentReport(
        sentences=1,
        tokens=n,
        matches=ops.count("M"),
        substitutions=ops.count("S"),
        insertions=ops.count("I"),
        deletions=ops.count("D"),
        edited_tokens=edited,
        mean_rate=rate,
        std_rate=0.0,
    )


_END = object()


def measure_corpus(
    clean_stream: Iterable[str | Sequence[str]],
    noisy_stream: Iterable[str | Sequence[str]],
    tokenizer: Callable[[str], Sequence[str]] | None = None,
) -> AlignmentReport:
    """Align line pairs and aggregate; raises :class:`LineCountMismatch`.

    String lines are split on whitespace unless a ``tokenizer`` is given;
    pass :func:`gecnoise.text.tokenize_plain` for detokenized text.
    """
    split = tokenizer or str.split
    counts = dict.fromkeys(("tokens", "matches", "substitutions", "insertions", "deletions", "edited_tokens"), 0)
    rates: list[float] = []
    n_clean = n_noisy = 0
    for clean, noisy in itertools.zip_longest(clean_stream, noisy_stream, fillvalue=_END):
        n_clean += clean is not _END
        n_noisy += noisy is not _END
        if clean is _END or noisy is _END:
            continue
        report = align_tokens(
            split(clean) if isinstance(clean, str) else clean,
            split(noisy) if isinstance(noisy, str) else noisy,
        )
        for key in counts:
            counts[key] += getattr(report, key)
        rates.append(report.mean_rate)
    if n_clean != n_noisy:
        raise LineCountMismatch(n_clean, n_noisy)
    if rates:
        mean = math.fsum(rates) / len(rates)
        std = math.sqrt(math.fsum((r - mean) ** 2 for r in rates) / len(rates))
    else:
        mean = std = 0.0
    return AlignmentReport(sentences=len(rates), mean_rate=mean, std_rate=std, **counts)

