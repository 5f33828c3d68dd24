"""Input checks shared by the estimators and the CLI."""
from __future__ import annotations

import os
from fractions import Fraction
from numbers import Real

from .patterns import Cover
from .score import Piece, parse_midi, parse_pointset_text, read_piece

PATTERN_ALGORITHMS = ("cosiatec", "siatec-compress")
DISTANCES = ("l1", "l2")


def check_piece(X, tatums_per_beat: int | None = None, allow_empty: bool = True) -> Piece:
    """Coerce ``X`` to a Piece.

    Accepts a Piece, raw MIDI bytes, point-set text, or a path to either.
    """
    if isinstance(X, Piece):
        piece = X
    elif isinstance(X, (bytes, bytearray)):
        piece = parse_midi(bytes(X), tatums_per_beat) if X[:4] == b"MThd" \
            else parse_pointset_text(X.decode("utf-8"))
    elif isinstance(X, (str, os.PathLike)):
        if isinstance(X, str) and "\n" in X:
            piece = parse_pointset_text(X)
        else:
            piece = read_piece(X, tatums_per_beat)
    else:
        raise TypeError(f"expected a Piece, MIDI bytes, text or path, got {type(X).__name__}")
    if not allow_empty and not piece.notes:
        raise ValueError("piece has no notes")
    return piece


def check_segment_beats(value) -> Fraction:
    try:
        seg = Fraction(str(value)) if isinstance(value, str) else Fraction(value).limit_denominator(10 ** 6)
    except (ValueError, TypeError, ZeroDivisionError):
        raise ValueError(f"segment_beats must be a positive number, got {value!r}") from None
    if seg <= 0:
        raise ValueError(f"segment_beats must be positive, got {value!r}")
    return seg


def check_weights(weights) -> tuple[float, float, float]:
    if isinstance(weights, str):
        weights = weights.split(",")
    try:
        w = tuple(float(x) for x in weights)
    except (TypeError, ValueError):
        raise ValueError(f"weights must be three numbers, got {weights!r}") from None
    if len(w) != 3 or any(x < 0 for x in w):
        raise ValueError(f"weights must be three non-negative numbers, got {weights!r}")
    return w


def check_pattern_lengths(min_len, max_len) -> tuple[int, int | None]:
    if int(min_len) != min_len or min_len < 1:
        raise ValueError(f"min pattern length must be an integer >= 1, got {min_len!r}")
    if max_len is not None and (int(max_len) != max_len or max_len < min_len):
        raise ValueError(f"max pattern length must be an integer >= {min_len}, got {max_len!r}")
    return int(min_len), None if max_len is None else int(max_len)


def check_choice(name: str, value, choices) -> str:
    if value not in choices:
        raise ValueError(f"{name} must be one of {', '.join(choices)}; got {value!r}")
    return value


def check_positive(name: str, value, integer: bool = False):
    if not isinstance(value, Real) or value <= 0 or (integer and int(value) != value):
        kind = "a positive integer" if integer else "positive"
        raise ValueError(f"{name} must be {kind}, got {value!r}")
    return int(value) if integer else float(value)


def check_cover(cover) -> Cover:
    if not isinstance(cover, Cover):
        raise TypeError(f"expected a Cover, got {type(cover).__name__}")
    return cover
