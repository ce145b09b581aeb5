"""Input validation helpers shared by the estimator and the CLI."""
from __future__ import annotations

from typing import Iterable

from .m2 import M2Sentence, apply_edits, parse_m2

__all__ = ["check_sentences", "check_m2_corpus", "check_rate"]


def _check_tokens(tokens, where: str) -> tuple[str, ...]:
    out = []
    for tok in tokens:
        if not isinstance(tok, str):
            raise TypeError(f"{where}: tokens must be str, got {type(tok).__name__}")
        if not tok or any(c.isspace() for c in tok):
            raise ValueError(f"{where}: invalid token {tok!r}")
        out.append(tok)
    return tuple(out)


def check_sentences(X, annotator: int = 0) -> list[tuple[str, ...]]:
    """Coerce ``X`` to a list of token tuples.

    Items may be whitespace-tokenized strings, token sequences, or
    :class:`M2Sentence` objects (their corrected side is used).
    A bare string is rejected: pass a list of lines.
    """
    if isinstance(X, (str, bytes)):
        raise TypeError("expected a sequence of sentences, got a single string")
    try:
        items = list(X)
    except TypeError:
        raise TypeError(f"expected an iterable of sentences, got {type(X).__name__}") from None
    out = []
    for i, item in enumerate(items):
        where = f"sentence {i}"
        if isinstance(item, str):
            out.append(tuple(item.split()))
        elif isinstance(item, M2Sentence):
            out.append(apply_edits(item, annotator).tokens)
        elif isinstance(item, bytes):
            raise TypeError(f"{where}: bytes are not accepted, decode to str first")
        else:
            try:
                out.append(_check_tokens(item, where))
            except TypeError as exc:
                if "tokens must be str" in str(exc):
                    raise
                raise TypeError(f"{where}: expected str, token sequence or M2Sentence") from None
    return out


def check_m2_corpus(X) -> list[M2Sentence]:
    """Coerce ``X`` to a list of M2 sentences; a string is parsed as M2 text."""
    if isinstance(X, str):
        return parse_m2(X)
    if isinstance(X, M2Sentence):
        return [X]
    if not isinstance(X, Iterable):
        raise TypeError(f"expected M2 text or M2Sentence objects, got {type(X).__name__}")
    out = list(X)
    for i, item in enumerate(out):
        if not isinstance(item, M2Sentence):
            raise TypeError(f"item {i}: expected M2Sentence, got {type(item).__name__}")
    if not out:
        raise ValueError("empty M2 corpus")
    return out


def check_rate(value, name: str = "target_rate"):
    """Return ``"corpus"`` or a float in [0, 1]."""
    if isinstance(value, str):
        if value == "corpus":
            return value
        try:
            value = float(value)
        except ValueError:
            raise ValueError(f"{name} must be a number in [0, 1] or 'corpus', got {value!r}") from None
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be a number in [0, 1] or 'corpus', got {value!r}")
    return float(value)
