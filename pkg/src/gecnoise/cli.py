"""Command line interface: estimate, noise, measure, inspect.

Exit codes: 0 success, 1 usage error, 2 data or validation error.
"""
from __future__ import annotations

import argparse
import contextlib
import io
import itertools
import json
import sys
from pathlib import Path
from typing import Iterator, Sequence, TextIO

from . import __version__
from .aspects import TRIGGERS, AspectKind, AspectUnavailable
from .m2 import M2ParseError, format_m2_block
from .metrics import LineCountMismatch, measure_corpus
from .noiser import ConfigError, NoiseConfig, NoiseError, noise_corpus
from .profile import (
    Profile,
    ProfileError,
    dumps_profile,
    estimate_profile_from_files,
    load_profile,
    scale_profile,
)
from .text import detokenize, nfc, tokenize_plain

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; usage errors here are 1
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


# -- helpers -----------------------------------------------------------------


class _StdStream(io.TextIOWrapper):
    """UTF-8 view of a standard stream that leaves the stream open on close."""

    def close(self):
        if not self.closed:
            with contextlib.suppress(ValueError):
                self.flush()
            self.detach()


def _text_in(path: str | None) -> TextIO:
    if path in (None, "-"):
        return _StdStream(sys.stdin.buffer, encoding="utf-8", errors="strict", newline=None)
    try:
        return open(path, encoding="utf-8", errors="strict")
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from None


def _text_out(path: str | None) -> TextIO:
    if path in (None, "-"):
        sys.stdout.flush()
        return _StdStream(sys.stdout.buffer, encoding="utf-8", newline="\n")
    try:
        return open(path, "w", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from None


def _lines(fh: TextIO, name: str) -> Iterator[str]:
    lineno = 0
    try:
        for lineno, line in enumerate(fh, 1):
            yield line.rstrip("\r\n")
    except UnicodeDecodeError as exc:
        raise DataError(f"{name}:{lineno + 1}: invalid UTF-8 ({exc.reason})") from None


def _load_profile(path: str) -> Profile:
    try:
        return load_profile(path)
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from None
    except ProfileError as exc:
        raise DataError(f"{path}: invalid profile: {exc}") from None


def _parse_rate(value: str):
    if value == "corpus":
        return value
    try:
        rate = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a rate in [0, 1] or 'corpus', got {value!r}") from None
    if not 0.0 <= rate <= 1.0:
        raise argparse.ArgumentTypeError(f"rate must be in [0, 1], got {value}")
    return rate


def _parse_aspects(value: str):
    if value.isdigit():
        return int(value)
    parts = [p.strip() for p in value.split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("empty aspect list")
    try:
        return frozenset(AspectKind.parse(int(p) if p.isdigit() else p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _parse_seeds(value: str) -> list[int]:
    try:
        seeds = [int(p) for p in value.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or a comma list of integers, got {value!r}") from None
    if any(s < 0 or s >= 1 << 64 for s in seeds):
        raise argparse.ArgumentTypeError("seeds must be unsigned 64-bit integers")
    if len(set(seeds)) != len(seeds):
        raise argparse.ArgumentTypeError("duplicate seeds")
    return seeds


def _positive(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        n = 0
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value!r}")
    return n


def _pct(x: float) -> str:
    return f"{100 * x:.1f}%"


def _profile_summary(profile: Profile) -> list[str]:
    lines = [
        f"name: {profile.name}",
        f"language: {profile.language}",
        f"role: {profile.role.value}",
        f"corpus error level: {_pct(profile.level)} ({profile.level!r})",
        f"error amount std: {profile.error_amount.std:.4f}",
        f"lexicon size: {len(profile.lexicon)}",
        "",
        f"{'aspect':<14} {'trigger':<11} {'probability':>12}",
    ]
    disabled = []
    for kind in AspectKind:
        block = profile.aspects.get(kind.slug)
        if block is None or not any(block["triggers"].values()):
            disabled.append(kind.slug)
            continue
        for t in TRIGGERS[kind]:
            flag = "  saturated" if t in block["saturated"] else ""
            lines.append(f"{kind.slug:<14} {t:<11} {block['triggers'][t]:>12.6f}{flag}")
        for dname, dist in sorted(block["distributions"].items()):
            size = sum(len(v) for v in dist.values()) if dist and isinstance(next(iter(dist.values())), dict) else len(dist)
            lines.append(f"{'':<14} table {dname}: {size} entries")
    lines.append("")
    lines.append("disabled aspects: " + (", ".join(disabled) if disabled else "none"))
    return lines


# -- subcommands ---------------------------------------------------------------


def cmd_estimate(args) -> int:
    extra: list[str] = []
    if args.lexicon:
        with _text_in(args.lexicon) as fh:
            extra = [w for line in _lines(fh, args.lexicon) for w in line.split()]
    for path in args.m2:
        if not Path(path).is_file():
            raise DataError(f"{path}: no such file")
    profile = estimate_profile_from_files(
        args.m2, annotator=args.annotator, name=args.name, language=args.language, role=args.role,
        extra_words=extra,
    )
    with _text_out(args.out) as fh:
        fh.write(dumps_profile(profile))
    print("\n".join(_profile_summary(profile)))
    return EXIT_OK


def _noise_run(args, profile: Profile, seed: int, out_path: str | None, m2_path: str | None) -> None:
    config = NoiseConfig(
        target_rate=args.target_rate,
        aspect_selection=args.aspects,
        preserve_tokenization=args.preserve_tokens,
        seed=seed,
        emit_m2=m2_path is not None,
    )
    name = args.input or "<stdin>"
    with contextlib.ExitStack() as stack:
        fin = stack.enter_context(_text_in(args.input))
        lines, originals = itertools.tee(_lines(fin, name))
        split = tokenize_plain if args.plain else str.split
        noised = noise_corpus((split(line) for line in lines), profile, config, workers=args.threads)
        fout = stack.enter_context(_text_out(out_path))
        fm2 = stack.enter_context(_text_out(m2_path)) if m2_path else None
        for original, result in zip(originals, noised):
            clean = [nfc(t) for t in split(original)]
            if list(result.tokens) == clean:
                # untouched lines pass through byte for byte
                fout.write(original + "\n")
            else:
                fout.write((detokenize(result.tokens) if args.plain else result.line) + "\n")
            if fm2 is not None:
                fm2.write(format_m2_block(result.to_m2()))


def _suffixed(path: str, seed: int) -> str:
    return f"{path}.seed{seed}"


def cmd_noise(args) -> int:
    seeds = args.seed
    if len(seeds) > 1 and args.output in (None, "-"):
        raise UsageError("several seeds need --output; outputs are written as <output>.seed<N>")
    if len(seeds) > 1 and args.input in (None, "-"):
        raise UsageError("several seeds need --input to be a file (stdin can only be read once)")
    try:
        NoiseConfig(args.target_rate, args.aspects, args.preserve_tokens, seeds[0])
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    profile = _load_profile(args.profile)
    for seed in seeds:
        if len(seeds) > 1:
            out = _suffixed(args.output, seed)
            m2 = _suffixed(args.emit_m2, seed) if args.emit_m2 else None
        else:
            out, m2 = args.output, args.emit_m2
        _noise_run(args, profile, seed, out, m2)
    return EXIT_OK


def cmd_measure(args) -> int:
    split = tokenize_plain if args.plain else str.split
    with _text_in(args.clean) as fc, _text_in(args.noisy) as fn:
        report = measure_corpus(
            (split(x) for x in _lines(fc, args.clean)),
            (split(x) for x in _lines(fn, args.noisy)),
        )
    if args.json:
        print(json.dumps(report.to_dict(), sort_keys=True))
    else:
        print(report.format())
    return EXIT_OK


def cmd_inspect(args) -> int:
    profile = _load_profile(args.profile)
    if args.target_rate is not None:
        if args.target_rate != "corpus":
            profile = scale_profile(profile, args.target_rate)
        if args.out:
            with _text_out(args.out) as fh:
                fh.write(dumps_profile(profile))
    elif args.out:
        raise UsageError("--out requires --target-rate")
    print("\n".join(_profile_summary(profile)))
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gecnoise", description="Estimate error profiles from M2 corpora and noise text with them.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("estimate", help="estimate a profile from M2 files")
    p.add_argument("--m2", nargs="+", required=True, metavar="PATH", help="M2 files, read as one concatenated corpus")
    p.add_argument("--annotator", type=int, default=0)
    p.add_argument("--name", default="profile")
    p.add_argument("--language", default="und")
    p.add_argument("--role", choices=["dev", "development", "test"], default="dev")
    p.add_argument("--out", required=True, help="profile JSON to write ('-' for stdout)")
    p.add_argument("--lexicon", help="extra word list (whitespace separated) for confusion lookups")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("noise", help="inject errors into clean text")
    p.add_argument("--profile", required=True)
    p.add_argument("--target-rate", type=_parse_rate, default="corpus", help="rate in [0, 1] or 'corpus'")
    p.add_argument("--aspects", type=_parse_aspects, default=8,
                   help="cumulative level 0-8, or a comma list of aspect names/numbers")
    p.add_argument("--preserve-tokens", action="store_true", help="only aspects 1-4, token counts never change")
    p.add_argument("--seed", type=_parse_seeds, default=[0], help="seed or comma list of seeds")
    p.add_argument("--emit-m2", metavar="PATH", help="write gold M2 mapping the output back to the input")
    p.add_argument("--input", help="input file (default stdin)")
    p.add_argument("--output", help="output file (default stdout)")
    p.add_argument("--threads", type=_positive, default=1, help="worker processes; output is identical for any value")
    p.add_argument("--plain", action="store_true", help="input is untokenized text; tokenize and detokenize")
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("measure", help="token-edit rate between clean and noisy files")
    p.add_argument("--clean", required=True)
    p.add_argument("--noisy", required=True)
    p.add_argument("--json", action="store_true")
    p.add_argument("--plain", action="store_true", help="tokenize untokenized text before aligning")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("inspect", help="summarize (and optionally rescale) a profile")
    p.add_argument("--profile", required=True)
    p.add_argument("--target-rate", type=_parse_rate, help="show the profile scaled to this rate")
    p.add_argument("--out", help="with --target-rate, write the scaled profile here")
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (DataError, M2ParseError, ProfileError, LineCountMismatch, AspectUnavailable, NoiseError) as exc:
        print(f"gecnoise: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except BrokenPipeError:
        return EXIT_OK
    except SystemExit as exc:
        # --help and --version
        return exc.code if isinstance(exc.code, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
