"""Spiral array geometry: pitch-class helix, major/minor key helices,
centers of effect, pitch spelling and global key estimation.

Pitches live on the line of fifths (C=0, G=1, F=-1, ...). Index ``k`` maps to
``(r sin(k pi/2), r cos(k pi/2), k h)``, so a fifth is one quarter turn and a
major third (four fifths) lands straight above its root.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

MAJOR = "major"
MINOR = "minor"
MODES = (MAJOR, MINOR)

NAMES = ("F", "C", "G", "D", "A", "E", "B")


class SpiralError(ValueError):
    """Raised for out-of-domain spiral array queries."""


@dataclass(frozen=True)
class SpiralConfig:
    radius: float = 1.0
    height: float = math.sqrt(2.0 / 15.0)
    # (root, fifth, third)
    chord_weights: tuple[float, float, float] = (0.536, 0.274, 0.190)
    # (I, V, IV)
    key_weights: tuple[float, float, float] = (0.516, 0.315, 0.168)
    alpha: float = 0.75
    beta: float = 0.75
    max_index: int = 35


DEFAULT_CONFIG = SpiralConfig()


@dataclass(frozen=True, order=True)
class SpelledPitch:
    fifths_index: int
    octave: int = 4

    @property
    def pitch_class(self) -> int:
        return (7 * self.fifths_index) % 12

    @property
    def name(self) -> str:
        k = self.fifths_index
        letter = NAMES[(k + 1) % 7]
        acc = (k + 1) // 7
        return letter + ("#" * acc if acc > 0 else "b" * -acc)

    @classmethod
    def from_name(cls, name: str, octave: int = 4) -> "SpelledPitch":
        """Build from a note name such as ``"C#"``, ``"Bb"`` or ``"F##"``."""
        letter, accs = name[0].upper(), name[1:]
        if letter not in NAMES or any(a not in "#b" for a in accs):
            raise SpiralError(f"bad pitch name {name!r}")
        shift = accs.count("#") - accs.count("b")
        return cls(NAMES.index(letter) - 1 + 7 * shift, octave)


SpiralPoint = np.ndarray  # shape (3,)


@dataclass(frozen=True)
class KeyRep:
    tonic_fifths_index: int
    mode: str
    position: tuple[float, float, float]

    @property
    def name(self) -> str:
        tonic = SpelledPitch(self.tonic_fifths_index).name
        return f"{tonic} {self.mode}"

    def __str__(self) -> str:
        return self.name


def _check_index(k: int, config: SpiralConfig) -> None:
    if abs(k) > config.max_index:
        raise SpiralError(
            f"fifths index {k} outside [-{config.max_index}, {config.max_index}]")


@lru_cache(maxsize=None)
def _position(k: int, radius: float, height: float) -> tuple[float, float, float]:
    # exact values on the quarter turns keep the helix symmetric
    s, c = ((0.0, 1.0), (1.0, 0.0), (0.0, -1.0), (-1.0, 0.0))[k % 4]
    return (radius * s, radius * c, k * height)


def pitch_position(p: SpelledPitch | int,
                   config: SpiralConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Helix coordinates of a spelled pitch (octave is ignored)."""
    k = p.fifths_index if isinstance(p, SpelledPitch) else int(p)
    _check_index(k, config)
    return np.array(_position(k, config.radius, config.height))


@lru_cache(maxsize=None)
def position_table(config: SpiralConfig = DEFAULT_CONFIG) -> dict[int, tuple[float, float, float]]:
    """Every valid fifths index mapped to its helix coordinates."""
    m = config.max_index
    return {k: _position(k, config.radius, config.height) for k in range(-m, m + 1)}


def position_tuple(k: int, config: SpiralConfig = DEFAULT_CONFIG
                   ) -> tuple[float, float, float]:
    _check_index(k, config)
    return _position(k, config.radius, config.height)


@lru_cache(maxsize=None)
def _fifth_distance(d: int, radius: float, height: float) -> float:
    a = _position(0, radius, height)
    b = _position(d, radius, height)
    return math.dist(a, b)


def interval_distance(k1: int, k2: int, config: SpiralConfig = DEFAULT_CONFIG) -> float:
    """Distance between two helix points; depends only on ``|k1 - k2|``."""
    return _fifth_distance(abs(k1 - k2), config.radius, config.height)


class Cloud:
    """Weighted collection of spiral array points."""

    __slots__ = ("points", "weights")

    def __init__(self, points: Iterable[Sequence[float]] = (),
                 weights: Iterable[float] | None = None):
        self.points = [tuple(float(c) for c in p) for p in points]
        self.weights = [1.0] * len(self.points) if weights is None else [float(w) for w in weights]
        if len(self.points) != len(self.weights):
            raise ValueError("points and weights differ in length")
        if any(w <= 0 for w in self.weights):
            raise ValueError("cloud weights must be positive")

    @classmethod
    def from_pitches(cls, pitches: Iterable[SpelledPitch | int],
                     weights: Iterable[float] | None = None,
                     config: SpiralConfig = DEFAULT_CONFIG) -> "Cloud":
        pitches = list(pitches)
        if weights is None:
            weights = [1.0] * len(pitches)
        return cls([pitch_position(p, config) for p in pitches], weights)

    def __len__(self) -> int:
        return len(self.points)

    def __bool__(self) -> bool:
        return bool(self.points)

    def __repr__(self) -> str:
        return f"Cloud(n={len(self)})"


class EmptyCloudError(ValueError):
    pass


def center_of_effect(cloud: Cloud) -> np.ndarray:
    if not cloud:
        raise EmptyCloudError("center of effect of an empty cloud")
    w = np.asarray(cloud.weights)
    pts = np.asarray(cloud.points)
    return (w[:, None] * pts).sum(axis=0) / w.sum()


def _chord(root: int, mode: str, config: SpiralConfig) -> np.ndarray:
    w_root, w_fifth, w_third = config.chord_weights
    third = root + 4 if mode == MAJOR else root - 3
    pos = lambda k: np.array(_position(k, config.radius, config.height))  # noqa: E731
    return w_root * pos(root) + w_fifth * pos(root + 1) + w_third * pos(third)


def key_position(tonic: int, mode: str = MAJOR,
                 config: SpiralConfig = DEFAULT_CONFIG) -> KeyRep:
    """Position of a key on the major or minor key helix.

    A major key combines its I, V and IV chords. A minor key mixes the major
    and minor dominant (``alpha``) and the minor and major subdominant
    (``beta``) around its minor tonic chord.
    """
    if mode not in MODES:
        raise SpiralError(f"unknown mode {mode!r}")
    # normalized so a key is a convex mix of chords and the helix stays symmetric
    total = sum(config.key_weights)
    w1, w2, w3 = (w / total for w in config.key_weights)
    if mode == MAJOR:
        pos = (w1 * _chord(tonic, MAJOR, config)
               + w2 * _chord(tonic + 1, MAJOR, config)
               + w3 * _chord(tonic - 1, MAJOR, config))
    else:
        a, b = config.alpha, config.beta
        dominant = a * _chord(tonic + 1, MAJOR, config) + (1 - a) * _chord(tonic + 1, MINOR, config)
        subdominant = b * _chord(tonic - 1, MINOR, config) + (1 - b) * _chord(tonic - 1, MAJOR, config)
        pos = w1 * _chord(tonic, MINOR, config) + w2 * dominant + w3 * subdominant
    return KeyRep(tonic, mode, tuple(float(c) for c in pos))


def candidate_keys(center: int = 0, span: int = 7,
                   config: SpiralConfig = DEFAULT_CONFIG) -> list[KeyRep]:
    return [key_position(t, m, config)
            for t in range(center - span, center + span + 1) for m in MODES]


def nearest_key(point: Sequence[float], keys: Sequence[KeyRep]) -> KeyRep:
    """Key whose position is closest to ``point``.

    Ties go to the smaller ``|tonic|`` and then to major.
    """
    if not keys:
        raise SpiralError("no candidate keys")
    pos = np.array([k.position for k in keys])
    d = np.sqrt(((pos - np.asarray(point, dtype=float)) ** 2).sum(axis=1))
    best = d.min()
    tied = [k for k, di in zip(keys, d) if di <= best + 1e-12]
    return min(tied, key=lambda k: (abs(k.tonic_fifths_index), k.mode != MAJOR))


def spelling_candidates(midi_pitch: int, tonic: int = 0, span: int = 15) -> list[int]:
    """Line-of-fifths indices in ``[tonic-span, tonic+span]`` for a MIDI pitch."""
    base = (7 * midi_pitch) % 12
    lo = tonic - span
    first = lo + ((base - lo) % 12)
    return list(range(first, tonic + span + 1, 12))


def spell_index(midi_pitch: int, context: Sequence[float], tonic: int,
                config: SpiralConfig = DEFAULT_CONFIG, table=None) -> int:
    """Fifths index of ``midi_pitch`` nearest ``context``; see :func:`spell`."""
    if table is None:
        table = position_table(config)
    cx, cy, cz = context
    k = tonic - 15 + (((7 * midi_pitch) % 12 - tonic + 15) % 12)
    best = None
    best_key = None
    while k <= tonic + 15:
        pos = table.get(k)
        if pos is not None:
            d = math.sqrt((pos[0] - cx) ** 2 + (pos[1] - cy) ** 2 + (pos[2] - cz) ** 2)
            key = (round(d, 12), abs(k - tonic), abs(k))
            if best_key is None or key < best_key:
                best, best_key = k, key
        k += 12
    if best is None:
        raise SpiralError(f"no spelling for midi pitch {midi_pitch}")
    return best


def spell(midi_pitch: int, context_ce: Sequence[float], global_key: KeyRep,
          config: SpiralConfig = DEFAULT_CONFIG) -> SpelledPitch:
    """Enharmonic spelling of ``midi_pitch`` nearest to a context c.e.

    Ties prefer the spelling closest to the key's tonic on the line of fifths,
    then the smaller absolute index.
    """
    if not 0 <= midi_pitch <= 127:
        raise SpiralError(f"midi pitch {midi_pitch} outside 0-127")
    k = spell_index(midi_pitch, context_ce, global_key.tonic_fifths_index, config)
    return SpelledPitch(k, midi_pitch // 12 - 1)


def _window_index(midi_pitch: int, lo: int) -> int:
    return lo + ((7 * midi_pitch - lo) % 12)


def global_key(piece, config: SpiralConfig = DEFAULT_CONFIG) -> KeyRep:
    """Single key for a whole piece.

    Pitch classes are spelled with the 12-fifth window (out of those from
    Gb..F up to C..B#) that keeps the duration-weighted cloud most compact;
    equally compact windows are compared by how close their c.e. comes to a
    key. The answer is the key nearest the chosen c.e. Every rule is relative
    to the cloud, so transposing the piece transposes the key.
    """
    notes = list(getattr(piece, "notes", piece))
    if not notes:
        raise SpiralError("global key of an empty piece")
    weights: dict[int, float] = {}
    for n in notes:
        pc = n.midi_pitch % 12
        weights[pc] = weights.get(pc, 0.0) + n.duration
    w = np.array(list(weights.values()))
    total = w.sum()
    options = []
    for lo in range(-6, 6):
        pts = np.array([_position(_window_index(pc, lo), config.radius, config.height)
                        for pc in weights])
        ce = (w[:, None] * pts).sum(axis=0) / total
        spread = float((w * ((pts - ce) ** 2).sum(axis=1)).sum() / total)
        key = nearest_key(ce, candidate_keys(int(round(ce[2] / config.height)), 7, config))
        ks = [_window_index(pc, lo) for pc in weights]
        shape = tuple(sorted((k - min(ks), wt) for k, wt in zip(ks, weights.values())))
        options.append((spread, math.dist(ce, key.position), shape, abs(ce[2]), key))
    # spread, then key distance, then the spelled shape as a translation-free
    # tie-break between mirror images; what is left differs by whole cycles
    for field in range(2):
        least = min(o[field] for o in options)
        options = [o for o in options if o[field] <= least + 1e-9]
    return min(options, key=lambda o: (o[2], o[3]))[4]
