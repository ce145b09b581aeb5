"""scikit-learn style front end: ``fit`` estimates a profile, ``transform`` noises."""
from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .m2 import M2Sentence
from .noiser import NoiseConfig, noise_corpus
from .profile import Profile, estimate_profile
from .validation import check_m2_corpus, check_rate, check_sentences

__all__ = ["ProfileNoiser"]


class ProfileNoiser(TransformerMixin, BaseEstimator):
    """Learn an error profile from M2 data and inject matching noise.

    Parameters
    ----------
    target_rate : float or "corpus"
        Token-edit rate to generate; ``"corpus"`` keeps the estimated level.
    aspects : int or iterable
        Cumulative level 0..8 or an explicit set of aspect names/numbers.
    preserve_tokenization : bool
        Restrict to aspects that never change the token count.
    seed : int
        Base seed; sentence ``i`` of every ``transform`` call uses index ``i``.
    annotator : int
        Which annotator's corrections to learn from.
    profile : Profile, optional
        A prefitted profile; ``fit`` then only validates parameters.
    n_jobs : int
        Worker processes for ``transform``; output does not depend on it.

    Attributes
    ----------
    profile_ : Profile
        The estimated (or supplied) profile, unscaled.
    config_ : NoiseConfig
    """

    def __init__(self, target_rate="corpus", aspects=8, preserve_tokenization=False, seed=0, annotator=0,
                 name="profile", language="und", role="development", profile=None, n_jobs=1):
        self.target_rate = target_rate
        self.aspects = aspects
        self.preserve_tokenization = preserve_tokenization
        self.seed = seed
        self.annotator = annotator
        self.name = name
        self.language = language
        self.role = role
        self.profile = profile
        self.n_jobs = n_jobs

    def _config(self, emit_m2: bool = False) -> NoiseConfig:
        return NoiseConfig(
            target_rate=check_rate(self.target_rate),
            aspect_selection=self.aspects,
            preserve_tokenization=self.preserve_tokenization,
            seed=self.seed,
            emit_m2=emit_m2,
        )

    def fit(self, X=None, y=None):
        """Estimate ``profile_`` from M2 sentences (or M2 text)."""
        config = self._config()
        if self.profile is not None:
            if not isinstance(self.profile, Profile):
                raise TypeError(f"profile must be a Profile, got {type(self.profile).__name__}")
            profile = self.profile
        else:
            if X is None:
                raise ValueError("fit needs M2 data unless a profile is given")
            profile = estimate_profile(check_m2_corpus(X), annotator=self.annotator, name=self.name,
                                       language=self.language, role=self.role)
        self.profile_ = profile
        self.config_ = config
        return self

    def _noise(self, X, emit_m2: bool):
        check_is_fitted(self, "profile_")
        sentences = check_sentences(X, self.annotator)
        return noise_corpus(sentences, self.profile_, self._config(emit_m2), workers=self.n_jobs)

    def transform(self, X) -> list[str]:
        """Noise sentences; returns space-joined token lines.

        ``X`` items may be tokenized lines, token lists or M2 sentences
        (the corrected side is noised).
        """
        return [s.line for s in self._noise(X, emit_m2=False)]

    def transform_m2(self, X) -> list[M2Sentence]:
        """Like :meth:`transform` but returns gold M2 mapping noise back to clean."""
        return [s.to_m2() for s in self._noise(X, emit_m2=True)]

    @property
    def corpus_error_level_(self) -> float:
        check_is_fitted(self, "profile_")
        return self.profile_.level
