"""M2 annotations: parsing, serialization and the clean/noisy edit algebra.

An M2 block is one ``S`` line with the tokenized (noisy) source sentence and
zero or more ``A`` lines, each a correcting edit::

    S He go home
    A 1 2|||VERB:SVA|||goes|||REQUIRED|||-NONE-|||0

Corrections run noisy -> clean.  :func:`invert_edits` turns them around so
that every edit describes the *error*, as a span over the clean tokens whose
replacement is the original noisy text.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

__all__ = [
    "Edit",
    "M2Sentence",
    "Segment",
    "CorrectedSentence",
    "M2ParseError",
    "parse_m2",
    "iter_m2",
    "read_m2",
    "iter_m2_path",
    "serialize_m2",
    "format_m2_block",
    "apply_edits",
    "invert_edits",
]

NONE = "-NONE-"
FIELD_SEP = "|||"


class M2ParseError(ValueError):
    """Malformed M2 input. ``line`` is 1-based, ``source`` a file name if known."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.reason = message
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where = f"{source}:{line}: " if line is not None else f"{source}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)


def _check_token(tok: str) -> None:
    if not tok or any(ch.isspace() for ch in tok):
        raise ValueError(f"invalid token {tok!r}: tokens must be non-empty and contain no whitespace")


@dataclass(frozen=True)
class Edit:
    """Replace ``tokens[start:end]`` by ``replacement`` (``start == end`` inserts)."""

    start: int
    end: int
    replacement: tuple[str, ...] = ()
    error_type: str = "UNK"
    annotator: int = 0

    def __post_init__(self):
        object.__setattr__(self, "replacement", tuple(self.replacement))
        if self.start < 0 or self.end < self.start:
            raise ValueError(f"invalid edit span ({self.start}, {self.end})")
        if self.annotator < 0:
            raise ValueError(f"annotator id must be non-negative, got {self.annotator}")
        for tok in self.replacement:
            _check_token(tok)
        if "|" in self.error_type or "\n" in self.error_type:
            raise ValueError(f"invalid error type {self.error_type!r}")

    @property
    def is_insertion(self) -> bool:
        return self.start == self.end

    @property
    def span_length(self) -> int:
        return self.end - self.start


def _check_edit_layout(edits: Sequence[Edit]) -> None:
    # edits belong to a single annotator and are sorted by (start, end)
    prev = None
    for e in edits:
        if prev is not None:
            if e.is_insertion and prev.is_insertion and e.start == prev.start:
                raise ValueError(f"duplicate insertion at index {e.start} for annotator {e.annotator}")
            if e.start < prev.end:
                raise ValueError(
                    f"overlapping edits ({prev.start}, {prev.end}) and ({e.start}, {e.end}) "
                    f"for annotator {e.annotator}"
                )
        prev = e


@dataclass(frozen=True)
class M2Sentence:
    """A tokenized source sentence with its edits, grouped by annotator."""

    source_tokens: tuple[str, ...]
    edits: tuple[Edit, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "source_tokens", tuple(self.source_tokens))
        for tok in self.source_tokens:
            _check_token(tok)
        n = len(self.source_tokens)
        ordered = tuple(sorted(self.edits, key=lambda e: (e.annotator, e.start, e.end)))
        for e in ordered:
            if e.end > n:
                raise ValueError(f"edit span ({e.start}, {e.end}) out of range for {n} tokens")
        object.__setattr__(self, "edits", ordered)
        for ann in self.annotators:
            _check_edit_layout(self.edits_for(ann))

    @property
    def annotators(self) -> tuple[int, ...]:
        return tuple(sorted({e.annotator for e in self.edits}))

    def edits_for(self, annotator: int = 0) -> tuple[Edit, ...]:
        return tuple(e for e in self.edits if e.annotator == annotator)


@dataclass(frozen=True)
class Segment:
    """One piece of a corrected sentence and the source span it came from."""

    corrected_start: int
    corrected_end: int
    source_start: int
    source_end: int
    source_tokens: tuple[str, ...]
    edited: bool
    error_type: str | None = None


@dataclass(frozen=True)
class CorrectedSentence:
    tokens: tuple[str, ...]
    provenance: tuple[Segment, ...] = field(default=())

    def source_tokens(self) -> tuple[str, ...]:
        """Rebuild the pre-correction tokens from the provenance segments."""
        out: list[str] = []
        for seg in self.provenance:
            out.extend(seg.source_tokens)
        return tuple(out)


# -- parsing -----------------------------------------------------------------


def _parse_a_line(line: str, lineno: int, n_tokens: int) -> Edit | None:
    # split the fixed fields from both ends so a replacement may contain "|"
    head = line[2:].split(FIELD_SEP, 2)
    tail = head[-1].rsplit(FIELD_SEP, 3) if len(head) == 3 else []
    if len(tail) != 4:
        raise M2ParseError("expected 6 '|||'-separated fields in A line", lineno)
    span, etype = head[0], head[1]
    repl, _required, _comment, ann = tail
    parts = span.split()
    if len(parts) != 2:
        raise M2ParseError(f"malformed span {span!r}", lineno)
    try:
        start, end = int(parts[0]), int(parts[1])
    except ValueError:
        raise M2ParseError(f"non-integer span {span!r}", lineno) from None
    try:
        annotator = int(ann.strip())
    except ValueError:
        raise M2ParseError(f"non-integer annotator id {ann!r}", lineno) from None
    if start == -1 and end == -1:
        return None  # noop (or UNK without position)
    if start < 0 or end < 0:
        raise M2ParseError(f"negative span {span!r}", lineno)
    if start > end:
        raise M2ParseError(f"span start {start} > end {end}", lineno)
    if end > n_tokens:
        raise M2ParseError(f"span ({start}, {end}) out of range for {n_tokens} tokens", lineno)
    if annotator < 0:
        raise M2ParseError(f"negative annotator id {annotator}", lineno)
    repl = repl.strip()
    replacement = () if repl in ("", NONE) else tuple(repl.split())
    return Edit(start, end, replacement, etype, annotator)


def _build_sentence(tokens: list[str], edits: list[tuple[Edit, int]], s_lineno: int) -> M2Sentence:
    by_ann: dict[int, list[tuple[Edit, int]]] = defaultdict(list)
    for e, ln in edits:
        by_ann[e.annotator].append((e, ln))
    for ann_edits in by_ann.values():
        ann_edits.sort(key=lambda item: (item[0].start, item[0].end))
        for (prev, _), (cur, ln) in zip(ann_edits, ann_edits[1:]):
            if cur.is_insertion and prev.is_insertion and cur.start == prev.start:
                raise M2ParseError(f"duplicate insertion at index {cur.start}", ln)
            if cur.start < prev.end:
                raise M2ParseError(
                    f"edit ({cur.start}, {cur.end}) overlaps ({prev.start}, {prev.end}) "
                    f"for annotator {cur.annotator}",
                    ln,
                )
    try:
        return M2Sentence(tuple(tokens), tuple(e for e, _ in edits))
    except ValueError as exc:
        raise M2ParseError(str(exc), s_lineno) from None


def iter_m2(lines: Iterable[str], source: str | None = None) -> Iterator[M2Sentence]:
    """Stream sentences from an iterable of M2 lines."""
    tokens: list[str] | None = None
    edits: list[tuple[Edit, int]] = []
    s_lineno = 0
    lineno = 0
    try:
        for lineno, raw in enumerate(lines, 1):
            line = raw.rstrip("\r\n")
            if not line.strip():
                if tokens is not None:
                    yield _build_sentence(tokens, edits, s_lineno)
                    tokens, edits = None, []
                continue
            if line.startswith("S ") or line == "S":
                if tokens is not None:
                    yield _build_sentence(tokens, edits, s_lineno)
                tokens, edits, s_lineno = line[2:].split(), [], lineno
            elif line.startswith("A "):
                if tokens is None:
                    raise M2ParseError("A line without a preceding S line", lineno)
                edit = _parse_a_line(line, lineno, len(tokens))
                if edit is not None:
                    edits.append((edit, lineno))
            else:
                raise M2ParseError(f"unexpected line {line[:40]!r}", lineno)
        if tokens is not None:
            yield _build_sentence(tokens, edits, s_lineno)
    except M2ParseError as exc:
        if source is not None and exc.source is None:
            raise M2ParseError(exc.reason, exc.line, source) from None
        raise


def parse_m2(text: str) -> list[M2Sentence]:
    return list(iter_m2(text.splitlines()))


def read_m2(path: str | Path) -> list[M2Sentence]:
    """Read an M2 file, decoding strictly as UTF-8."""
    path = Path(path)
    data = path.read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = data[: exc.start].count(b"\n") + 1
        raise M2ParseError(f"invalid UTF-8 byte at offset {exc.start}", line, str(path)) from None
    return list(iter_m2(text.splitlines(), source=str(path)))


def _decoded_lines(path: Path) -> Iterator[str]:
    with path.open("rb") as fh:
        for lineno, raw in enumerate(fh, 1):
            try:
                yield raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise M2ParseError(f"invalid UTF-8 byte at column {exc.start + 1}", lineno, str(path)) from None


def iter_m2_path(path: str | Path) -> Iterator[M2Sentence]:
    """Stream sentences from an M2 file without loading it whole."""
    path = Path(path)
    return iter_m2(_decoded_lines(path), source=str(path))


# -- serialization -----------------------------------------------------------


def format_m2_block(sentence: M2Sentence) -> str:
    lines = ["S " + " ".join(sentence.source_tokens)]
    for e in sentence.edits:
        repl = " ".join(e.replacement) if e.replacement else NONE
        lines.append(f"A {e.start} {e.end}|||{e.error_type}|||{repl}|||REQUIRED|||{NONE}|||{e.annotator}")
    return "\n".join(lines) + "\n\n"


def serialize_m2(sentences: Iterable[M2Sentence]) -> str:
    return "".join(format_m2_block(s) for s in sentences)


# -- edit algebra --------------------------------------------------------------


def apply_edits(sentence: M2Sentence, annotator: int = 0) -> CorrectedSentence:
    """Apply one annotator's edits and record where every output span came from."""
    src = sentence.source_tokens
    edits = sentence.edits_for(annotator)
    pieces: list[tuple[int, int, tuple[str, ...], bool, str | None]] = []
    pos = len(src)
    # right to left so source indices stay valid
    for e in reversed(edits):
        if e.end > pos:
            raise AssertionError(f"overlapping edits reached apply_edits at ({e.start}, {e.end})")
        for i in range(pos - 1, e.end - 1, -1):
            pieces.append((i, i + 1, (src[i],), False, None))
        pieces.append((e.start, e.end, e.replacement, True, e.error_type))
        pos = e.start
    for i in range(pos - 1, -1, -1):
        pieces.append((i, i + 1, (src[i],), False, None))
    pieces.reverse()

    tokens: list[str] = []
    provenance = []
    for s, t, out, edited, etype in pieces:
        c0 = len(tokens)
        tokens.extend(out)
        provenance.append(Segment(c0, len(tokens), s, t, src[s:t], edited, etype))
    return CorrectedSentence(tuple(tokens), tuple(provenance))


def invert_edits(sentence: M2Sentence, annotator: int = 0) -> tuple[tuple[str, ...], tuple[Edit, ...]]:
    """Return the clean tokens and the edits that turn them back into the source.

    Corrections that leave their span unchanged are dropped: they describe no
    error.  Adjacent source deletions collapse into one inverted insertion.
    """
    corrected = apply_edits(sentence, annotator)
    inverted: list[Edit] = []
    for seg in corrected.provenance:
        if not seg.edited or corrected.tokens[seg.corrected_start : seg.corrected_end] == seg.source_tokens:
            continue
        edit = Edit(seg.corrected_start, seg.corrected_end, seg.source_tokens, seg.error_type or "UNK", annotator)
        prev = inverted[-1] if inverted else None
        if prev is not None and prev.is_insertion and edit.is_insertion and prev.start == edit.start:
            edit = Edit(prev.start, prev.end, prev.replacement + edit.replacement, prev.error_type, annotator)
            inverted.pop()
        inverted.append(edit)
    return corrected.tokens, tuple(inverted)
