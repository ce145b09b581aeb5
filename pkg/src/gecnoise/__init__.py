"""Corpus-driven natural noise for text.

Estimate error profiles from M2 grammatical-error-correction corpora and
inject errors with the same statistics into clean text.
"""
from .aspects import AspectKind, AspectUnavailable, apply_aspect, classify_edit, strip_diacritics
from .m2 import (
    CorrectedSentence,
    Edit,
    M2ParseError,
    M2Sentence,
    apply_edits,
    invert_edits,
    iter_m2_path,
    parse_m2,
    read_m2,
    serialize_m2,
)
from .metrics import AlignmentReport, align_tokens, measure_corpus
from .noiser import NoiseConfig, NoisedSentence, noise_corpus, noise_sentence, sample_sentence_rate
from .profile import (
    ErrorAmountDistribution,
    Profile,
    ProfileRole,
    corpus_error_level,
    estimate_profile,
    estimate_profile_from_files,
    load_profile,
    save_profile,
    scale_profile,
)

__version__ = "0.1.0"


def __getattr__(name):
    # scikit-learn is only imported when the estimator is asked for
    if name == "ProfileNoiser":
        from .estimator import ProfileNoiser

        return ProfileNoiser
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


__all__ = [
    "AspectKind",
    "AspectUnavailable",
    "AlignmentReport",
    "CorrectedSentence",
    "Edit",
    "ErrorAmountDistribution",
    "M2ParseError",
    "M2Sentence",
    "NoiseConfig",
    "NoisedSentence",
    "Profile",
    "ProfileNoiser",
    "ProfileRole",
    "align_tokens",
    "apply_aspect",
    "apply_edits",
    "classify_edit",
    "corpus_error_level",
    "estimate_profile",
    "estimate_profile_from_files",
    "iter_m2_path",
    "invert_edits",
    "load_profile",
    "measure_corpus",
    "noise_corpus",
    "noise_sentence",
    "parse_m2",
    "read_m2",
    "sample_sentence_rate",
    "save_profile",
    "scale_profile",
    "serialize_m2",
    "strip_diacritics",
]
