"""Tonal tension profiles: cloud diameter, cloud momentum and tensile strain.

A piece is cut into equal windows (default: an eighth note). Each sounding
note adds its spelled spiral-array position to the window's cloud, weighted
by how many tatums it sounds inside the window.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .score import Piece
from .spiral import (DEFAULT_CONFIG, Cloud, KeyRep, SpiralConfig, center_of_effect,
                     global_key, interval_distance, position_table, position_tuple,
                     spell_index)

DEFAULT_SEGMENT_BEATS = Fraction(1, 2)
MEASURES = ("diameter", "momentum", "strain")
CSV_HEADER = ("segment", "onset_beats", "diameter", "momentum", "strain")


class TensionError(ValueError):
    pass


@dataclass
class TensionProfile:
    segment_beats: Fraction
    diameter: np.ndarray
    momentum: np.ndarray
    strain: np.ndarray
    key: KeyRep | None = field(default=None, compare=False)

    def __post_init__(self):
        self.segment_beats = Fraction(self.segment_beats)
        for name in MEASURES:
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))

    def __len__(self) -> int:
        return len(self.diameter)

    def vectors(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.diameter, self.momentum, self.strain

    def as_array(self) -> np.ndarray:
        """``(n_segments, 3)`` array of diameter, momentum, strain."""
        return np.column_stack(self.vectors()) if len(self) else np.zeros((0, 3))


def _overlap(on: int, off: int, lo: Fraction, hi: Fraction) -> Fraction:
    return max(Fraction(0), min(Fraction(off), hi) - max(Fraction(on), lo))


class SegmentLayout:
    """Static window structure of a piece: which notes sound where.

    Rhythm never changes while morphing, so this is computed once per
    template. Notes are grouped by the window containing their onset; a
    group is the unit of pitch spelling.
    """

    def __init__(self, piece: Piece, segment_beats=DEFAULT_SEGMENT_BEATS):
        segment_beats = Fraction(segment_beats)
        if segment_beats <= 0:
            raise TensionError(f"segment length must be positive, got {segment_beats}")
        self.segment_beats = segment_beats
        self.seg_tatums = segment_beats * piece.tatums_per_beat
        L = self.seg_tatums
        self.n_notes = len(piece.notes)
        self.n_segments = math.ceil(Fraction(piece.length) / L) if piece.notes else 0
        self.note_segments: list[list[tuple[int, float]]] = []
        self.seg_notes: list[list[tuple[int, float]]] = [[] for _ in range(self.n_segments)]
        self.note_group: list[int] = []
        self.groups: list[list[int]] = [[] for _ in range(self.n_segments)]
        self._order = [(n.onset, n.track, n.duration, n.velocity) for n in piece.notes]
        for i, n in enumerate(piece.notes):
            first = math.floor(Fraction(n.onset) / L)
            last = math.ceil(Fraction(n.offset) / L)
            spans = []
            for j in range(first, last):
                w = _overlap(n.onset, n.offset, j * L, (j + 1) * L)
                if w > 0:
                    spans.append((j, float(w)))
                    self.seg_notes[j].append((i, float(w)))
            self.note_segments.append(spans)
            self.note_group.append(first)
            self.groups[first].append(i)
        # weight of each note inside its own onset window, used as spelling context
        self.onset_weight = [spans[0][1] for spans in self.note_segments]
        self.group_segments = [
            sorted({j for i in g for j, _ in self.note_segments[i]}) for g in self.groups]
        self.nonempty = [bool(s) for s in self.seg_notes]

    def spell_group(self, g: int, pitches: Sequence[int], key: KeyRep,
                    ks: list[int], config: SpiralConfig = DEFAULT_CONFIG) -> None:
        """Spell the notes of group ``g`` in place into ``ks``.

        Notes are spelled in score order of their current pitches, each one
        against the c.e. of those already spelled (the key for the first).
        """
        tonic = key.tonic_fifths_index
        table = position_table(config)
        weight = self.onset_weight
        order = self._order
        members = sorted(self.groups[g], key=lambda i: (
            order[i][0], pitches[i], order[i][1], order[i][2], order[i][3]))
        sx = sy = sz = sw = 0.0
        for i in members:
            ctx = key.position if sw == 0.0 else (sx / sw, sy / sw, sz / sw)
            k = spell_index(pitches[i], ctx, tonic, config, table)
            ks[i] = k
            w = weight[i]
            x, y, z = table[k]
            sx += w * x
            sy += w * y
            sz += w * z
            sw += w

    def spell_all(self, pitches: Sequence[int], key: KeyRep,
                  config: SpiralConfig = DEFAULT_CONFIG) -> list[int]:
        ks = [0] * self.n_notes
        for g in range(self.n_segments):
            self.spell_group(g, pitches, key, ks, config)
        return ks

    def segment_stats(self, j: int, ks: Sequence[int],
                      config: SpiralConfig = DEFAULT_CONFIG
                      ) -> tuple[float, tuple[float, float, float] | None]:
        """Diameter and c.e. of window ``j`` (c.e. is ``None`` when empty)."""
        members = self.seg_notes[j]
        if not members:
            return 0.0, None
        table = position_table(config)
        sx = sy = sz = sw = 0.0
        distinct = set()
        for i, w in members:
            k = ks[i]
            distinct.add(k)
            x, y, z = table[k]
            sx += w * x
            sy += w * y
            sz += w * z
            sw += w
        diam = 0.0
        if len(distinct) > 1:
            d = sorted(distinct)
            for a in range(len(d)):
                for b in range(a + 1, len(d)):
                    dist = interval_distance(d[a], d[b], config)
                    if dist > diam:
                        diam = dist
        return diam, (sx / sw, sy / sw, sz / sw)

    def clouds(self, ks: Sequence[int], config: SpiralConfig = DEFAULT_CONFIG) -> list[Cloud]:
        return [Cloud([position_tuple(ks[i], config) for i, _ in members],
                      [w for _, w in members])
                for members in self.seg_notes]


def sequence_measures(ces: Sequence, key_position: Sequence[float],
                      start: int = 0, stop: int | None = None,
                      carried=None, prev_strain: float = 0.0
                      ) -> tuple[list[float], list[float]]:
    """Momentum and strain over windows ``start:stop`` given per-window c.e.'s.

    Empty windows (c.e. ``None``) repeat the last c.e., which makes their
    momentum 0 and their strain equal to the previous window's. Before the
    first non-empty window both measures are 0.
    """
    stop = len(ces) if stop is None else stop
    momentum, strain = [], []
    for j in range(start, stop):
        ce = ces[j]
        if ce is None:
            momentum.append(0.0)
            strain.append(prev_strain)
            continue
        momentum.append(math.dist(ce, carried) if carried is not None else 0.0)
        prev_strain = math.dist(ce, key_position)
        strain.append(prev_strain)
        carried = ce
    return momentum, strain


def segment(piece: Piece, segment_beats=DEFAULT_SEGMENT_BEATS, key: KeyRep | None = None,
            config: SpiralConfig = DEFAULT_CONFIG) -> list[Cloud]:
    """Duration-weighted spiral array clouds, one per window."""
    if not piece.notes:
        return []
    layout = SegmentLayout(piece, segment_beats)
    key = key or global_key(piece, config)
    return layout.clouds(layout.spell_all(piece.pitches(), key, config), config)


def cloud_diameter(cloud: Cloud) -> float:
    """Largest distance between two points of the cloud (0 if fewer than two)."""
    pts = np.unique(np.asarray(cloud.points, dtype=float).reshape(-1, 3), axis=0)
    if len(pts) < 2:
        return 0.0
    diff = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt((diff ** 2).sum(axis=-1)).max())


def cloud_momentum(prev: Cloud, curr: Cloud) -> float:
    """Distance between the c.e.'s of two clouds; 0 if either is empty."""
    if not prev or not curr:
        return 0.0
    return float(np.linalg.norm(center_of_effect(curr) - center_of_effect(prev)))


def tensile_strain(cloud: Cloud, key: KeyRep) -> float:
    if not cloud:
        return 0.0
    return float(np.linalg.norm(center_of_effect(cloud) - np.asarray(key.position)))


def profile_from_spelling(layout: SegmentLayout, ks: Sequence[int], key: KeyRep,
                          config: SpiralConfig = DEFAULT_CONFIG) -> TensionProfile:
    stats = [layout.segment_stats(j, ks, config) for j in range(layout.n_segments)]
    diam = [d for d, _ in stats]
    momentum, strain = sequence_measures([ce for _, ce in stats], key.position)
    return TensionProfile(layout.segment_beats, diam, momentum, strain, key)


def profile(piece: Piece, segment_beats=DEFAULT_SEGMENT_BEATS, key: KeyRep | None = None,
            config: SpiralConfig = DEFAULT_CONFIG) -> TensionProfile:
    """Tension profile of a whole piece.

    ``key`` defaults to the piece's own global key; pass the template key to
    compare a generated piece against its template on equal terms.
    """
    if not piece.notes:
        raise TensionError("tension profile of an empty piece")
    key = key or global_key(piece, config)
    layout = SegmentLayout(piece, segment_beats)
    ks = layout.spell_all(piece.pitches(), key, config)
    return profile_from_spelling(layout, ks, key, config)


def profile_distance(a: TensionProfile, b: TensionProfile,
                     weights: Sequence[float] = (1.0, 1.0, 1.0),
                     distance: str = "l1") -> float:
    """Weighted sum over the three measures of the per-measure distance.

    ``l1`` sums absolute per-window differences; ``l2`` takes the Euclidean
    norm of the difference vector.
    """
    if distance not in ("l1", "l2"):
        raise TensionError(f"unknown distance {distance!r}")
    total = 0.0
    for name, w in zip(MEASURES, weights):
        x, y = getattr(a, name), getattr(b, name)
        if len(x) != len(y):
            raise TensionError(f"{name} lengths differ: {len(x)} vs {len(y)}")
        diff = x - y
        d = float(np.abs(diff).sum()) if distance == "l1" else float(np.sqrt((diff ** 2).sum()))
        total += w * d
    return total


def correlations(a: TensionProfile, b: TensionProfile) -> dict[str, float]:
    """Pearson correlation per measure (NaN when a vector is constant)."""
    out = {}
    for name in MEASURES:
        x, y = getattr(a, name), getattr(b, name)
        if len(x) < 2 or x.std() == 0 or y.std() == 0:
            out[name] = float("nan")
        else:
            out[name] = float(np.corrcoef(x, y)[0, 1])
    return out


def write_profile_csv(prof: TensionProfile) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for j, row in enumerate(prof.as_array()):
        onset = float(j * prof.segment_beats)
        w.writerow([j, f"{onset:.6f}"] + [f"{v:.6f}" for v in row])
    return buf.getvalue()


def read_profile_csv(text: str, segment_beats=None) -> TensionProfile:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(c.strip() for c in rows[0]) != CSV_HEADER:
        raise TensionError(f"tension CSV must start with header {','.join(CSV_HEADER)}")
    body = [r for r in rows[1:] if r]
    try:
        values = np.array([[float(c) for c in r[2:5]] for r in body]).reshape(-1, 3)
        onsets = [Fraction(r[1]).limit_denominator(10 ** 6) for r in body]
    except (ValueError, IndexError) as exc:
        raise TensionError(f"bad tension CSV row: {exc}") from None
    if segment_beats is None:
        segment_beats = onsets[1] - onsets[0] if len(onsets) > 1 else DEFAULT_SEGMENT_BEATS
    return TensionProfile(segment_beats, values[:, 0], values[:, 1], values[:, 2])
