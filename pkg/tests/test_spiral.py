import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from _fixtures import brute_nearest_key
from morpheus.score import NoteEvent, Piece
from morpheus.spiral import (DEFAULT_CONFIG, Cloud, EmptyCloudError, SpelledPitch, SpiralError,
                             candidate_keys, center_of_effect, global_key, interval_distance,
                             key_position, nearest_key, pitch_position, spell,
                             spelling_candidates)

H = DEFAULT_CONFIG.height


def test_fifth_closer_than_second():
    assert interval_distance(0, 1) < interval_distance(0, 2)


def test_major_third_sits_straight_above_root():
    c, e = pitch_position(0), pitch_position(4)
    assert e[:2] == pytest.approx(c[:2])
    assert e[2] - c[2] == pytest.approx(4 * H)


def test_enharmonic_spellings_differ_in_space():
    g_sharp, a_flat = SpelledPitch.from_name("G#"), SpelledPitch.from_name("Ab")
    assert (g_sharp.fifths_index, a_flat.fifths_index) == (8, -4)
    assert g_sharp.pitch_class == a_flat.pitch_class == 8
    assert not np.allclose(pitch_position(g_sharp), pitch_position(a_flat))


@pytest.mark.parametrize("name", ["C", "F#", "Bb", "E##", "Gbb", "B"])
def test_name_round_trip(name):
    assert SpelledPitch.from_name(name).name == name


def test_bad_name_and_index():
    with pytest.raises(SpiralError):
        SpelledPitch.from_name("H")
    with pytest.raises(SpiralError):
        pitch_position(99)


def test_center_of_effect_weighted_mean():
    cloud = Cloud([(0, 0, 0), (2, 0, 0)], [1, 3])
    assert center_of_effect(cloud) == pytest.approx([1.5, 0, 0])
    with pytest.raises(EmptyCloudError):
        center_of_effect(Cloud())


def test_spell_examples():
    c_major = key_position(0)
    assert spell(60, c_major.position, c_major).name == "C"
    ctx = pitch_position(4)  # E
    assert spell(68, ctx, c_major).fifths_index == 8
    ab_major = key_position(-4)
    assert spell(68, ab_major.position, ab_major).name == "Ab"


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 127), st.integers(-7, 7),
       st.tuples(*[st.floats(-2, 2)] * 3))
def test_spelling_preserves_pitch_class(midi, tonic, ctx):
    key = key_position(tonic)
    sp = spell(midi, ctx, key)
    assert sp.pitch_class == midi % 12
    assert abs(sp.fifths_index - tonic) <= 15
    assert sp.fifths_index in spelling_candidates(midi, tonic)


def test_nearest_key_matches_brute_force():
    rng = np.random.default_rng(3)
    for _ in range(100):
        ks = rng.integers(-10, 11, size=int(rng.integers(1, 13)))
        w = rng.uniform(0.1, 2, size=len(ks))
        point = center_of_effect(Cloud([pitch_position(int(k)) for k in ks], w))
        keys = candidate_keys(int(round(point[2] / H)), 7)
        assert nearest_key(point, keys) == brute_nearest_key(point)


def test_key_positions_are_distinct_and_minor_differs():
    pts = {key_position(t, m).position for t in range(-7, 8) for m in ("major", "minor")}
    assert len(pts) == 30
    with pytest.raises(SpiralError):
        key_position(0, "dorian")


def _chord(pitches, dur=4):
    return Piece([NoteEvent(0, dur, p) for p in pitches])


@pytest.mark.parametrize("pitches, expected", [
    ([60, 64, 67], "C major"),
    ([57, 60, 64], "A minor"),
    ([62, 66, 69, 61], "D major"),
    ([65, 69, 72, 70], "F major"),
])
def test_global_key_examples(pitches, expected):
    assert global_key(_chord(pitches)).name == expected


def test_global_key_of_scale():
    scale = Piece([NoteEvent(i, 1, p) for i, p in enumerate([60, 62, 64, 65, 67, 69, 71, 72])]
                  + [NoteEvent(0, 8, 48)])
    assert global_key(scale).name == "C major"


def test_global_key_empty_piece():
    with pytest.raises(SpiralError):
        global_key(Piece())


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 12), st.integers(1, 4), st.integers(48, 72)),
                min_size=1, max_size=10),
       st.integers(-12, 12))
def test_global_key_transposes_with_the_piece(raw, shift):
    piece = Piece([NoteEvent(t, d, p) for t, d, p in raw])
    w = [0] * 12
    for n in piece.notes:
        w[n.midi_pitch % 12] += n.duration
    # a distribution that maps onto itself (e.g. an equal-weight tritone) has no
    # transposition-consistent key
    assume(not any(w == w[s:] + w[:s] for s in range(1, 12)))
    a, b = global_key(piece), global_key(piece.transpose(shift))
    assert a.mode == b.mode
    assert (7 * b.tonic_fifths_index - 7 * a.tonic_fifths_index - shift) % 12 == 0


def test_interval_distance_depends_on_fifth_count():
    for d in range(1, 12):
        assert interval_distance(3, 3 + d) == pytest.approx(math.dist(pitch_position(-5),
                                                                      pitch_position(-5 + d)))
