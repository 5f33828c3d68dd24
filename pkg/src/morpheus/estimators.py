"""scikit-learn style front ends for the three pipeline stages."""
from __future__ import annotations

from fractions import Fraction

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import _validation as val
from .optimizer import (DEFAULT_PENALTY, Assignment, build_problem, count_free,
                        realized_profile, vns)
from .patterns import Cover, compression_ratio, cosiatec, siatec_compress
from .score import Piece, to_pointset
from .spiral import global_key
from .tension import TensionProfile, correlations, profile

_ALGORITHMS = {"cosiatec": cosiatec, "siatec-compress": siatec_compress}


class TensionProfiler(TransformerMixin, BaseEstimator):
    """Tonal tension of a piece: cloud diameter, momentum and tensile strain.

    ``fit`` fixes the global key (from the piece unless ``key`` is given);
    ``transform`` profiles any piece against that key.

    Parameters
    ----------
    segment_beats : float, str or Fraction, default=0.5
        Window length in beats; 0.5 is an eighth note in quarter-note beats.
    key : KeyRep, optional
        Reference key for tensile strain and spelling.
    """

    def __init__(self, segment_beats=Fraction(1, 2), key=None):
        self.segment_beats = segment_beats
        self.key = key

    def fit(self, X, y=None):
        piece = val.check_piece(X, allow_empty=False)
        self.segment_beats_ = val.check_segment_beats(self.segment_beats)
        self.key_ = self.key or global_key(piece)
        return self

    def transform(self, X) -> TensionProfile:
        check_is_fitted(self, "key_")
        piece = val.check_piece(X, allow_empty=False)
        return profile(piece, self.segment_beats_, self.key_)


class PatternDiscoverer(BaseEstimator):
    """Repeated-pattern cover of a piece's point set.

    After ``fit``: ``cover_``, ``tecs_``, ``compression_ratio_`` and
    ``n_free_`` (how many pitches stay free when the cover constrains a
    morph).
    """

    def __init__(self, algorithm="cosiatec", min_pattern_len=1, max_pattern_len=None):
        self.algorithm = algorithm
        self.min_pattern_len = min_pattern_len
        self.max_pattern_len = max_pattern_len

    def _discover(self, piece: Piece) -> Cover:
        algo = val.check_choice("algorithm", self.algorithm, val.PATTERN_ALGORITHMS)
        lo, hi = val.check_pattern_lengths(self.min_pattern_len, self.max_pattern_len)
        return _ALGORITHMS[algo](to_pointset(piece).points, lo, hi)

    def fit(self, X, y=None):
        piece = val.check_piece(X)
        self.cover_ = self._discover(piece)
        self.tecs_ = list(self.cover_.tecs)
        self.compression_ratio_ = compression_ratio(self.cover_)
        self.n_free_ = count_free(piece, self.cover_)
        return self

    def transform(self, X) -> Cover:
        check_is_fitted(self, "cover_")
        return self._discover(val.check_piece(X))

    def fit_transform(self, X, y=None) -> Cover:
        return self.fit(X).cover_

    def summary(self) -> str:
        check_is_fitted(self, "cover_")
        return f"CR={self.compression_ratio_:.3f} TECs={len(self.tecs_)} UP={self.n_free_}"


class Morpheus(BaseEstimator):
    """Generate new pitches for a template's rhythm.

    The output follows a target tension profile (the template's own by
    default) while every repeated pattern found in the template recurs as an
    exact transposition and every track stays within its template range.

    ``fit(template, target=None, fixed_pitches=None)`` runs the search;
    ``transform(template)`` returns the generated piece.
    """

    def __init__(self, pattern_algorithm="cosiatec", min_pattern_len=1, max_pattern_len=None,
                 segment_beats=Fraction(1, 2), weights=(1.0, 1.0, 1.0),
                 penalty=DEFAULT_PENALTY, distance="l1", max_iters=10, random_state=None):
        self.pattern_algorithm = pattern_algorithm
        self.min_pattern_len = min_pattern_len
        self.max_pattern_len = max_pattern_len
        self.segment_beats = segment_beats
        self.weights = weights
        self.penalty = penalty
        self.distance = distance
        self.max_iters = max_iters
        self.random_state = random_state

    def fit(self, X, y=None, fixed_pitches=None, cover=None):
        template = val.check_piece(X, allow_empty=False)
        seg = val.check_segment_beats(self.segment_beats)
        weights = val.check_weights(self.weights)
        distance = val.check_choice("distance", self.distance, val.DISTANCES)
        max_iters = val.check_positive("max_iters", self.max_iters, integer=True)
        if self.penalty < 0:
            raise ValueError(f"penalty must be >= 0, got {self.penalty!r}")
        if cover is None:
            cover = PatternDiscoverer(self.pattern_algorithm, self.min_pattern_len,
                                      self.max_pattern_len).fit_transform(template)
        self.cover_ = val.check_cover(cover)
        self.problem_ = build_problem(template, self.cover_, y, weights=weights,
                                      penalty=self.penalty, fixed=fixed_pitches,
                                      segment_beats=seg, distance=distance)
        self.assignment_, self.trace_ = vns(self.problem_, max_iters, self.random_state)
        self.initial_objective_ = float(self.trace_.objectives[0])
        self.objective_ = float(self.trace_.best_objectives[-1])
        self.piece_ = self.problem_.to_piece(self.assignment_)
        self.profile_ = realized_profile(self.problem_, self.assignment_)
        return self

    @property
    def target_(self) -> TensionProfile:
        check_is_fitted(self, "problem_")
        return self.problem_.target

    def initial_assignment(self) -> Assignment:
        """The random starting point of the fitted search."""
        check_is_fitted(self, "trace_")
        return self.trace_.initial

    def correlations(self) -> dict[str, dict[str, float]]:
        """Per-measure Pearson correlation with the target, before and after."""
        check_is_fitted(self, "problem_")
        initial = realized_profile(self.problem_, self.initial_assignment())
        return {"initial": correlations(initial, self.target_),
                "final": correlations(self.profile_, self.target_)}

    def transform(self, X=None) -> Piece:
        check_is_fitted(self, "piece_")
        if X is not None:
            template = val.check_piece(X)
            if template.canonical() != self.problem_.template.canonical():
                raise ValueError("transform expects the template this model was fitted on")
        return self.piece_

    def fit_transform(self, X, y=None, **fit_params) -> Piece:
        return self.fit(X, y, **fit_params).piece_
