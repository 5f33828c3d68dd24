import struct

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from morpheus.score import (MidiParseError, NoteEvent, NotePairingError, Piece, ScoreError,
                            TextParseError, parse_midi, parse_pointset_text, slices,
                            to_pointset, write_midi, write_pointset_text)


def _smf(tracks, ppqn=480, fmt=1):
    out = b"MThd" + struct.pack(">IHHH", 6, fmt, len(tracks), ppqn)
    for body in tracks:
        out += b"MTrk" + struct.pack(">I", len(body)) + body
    return out


notes_st = st.lists(
    st.builds(NoteEvent, st.integers(0, 64), st.integers(1, 16), st.integers(21, 108),
              st.integers(1, 127), st.integers(0, 3)),
    max_size=30)


@settings(max_examples=60, deadline=None)
@given(notes_st, st.sampled_from([1, 2, 3, 4, 6, 12]))
def test_midi_round_trip(notes, tpb):
    piece = Piece(notes, tpb, 4, "rt")
    back = parse_midi(write_midi(piece))
    assert back.tatums_per_beat == tpb
    assert sorted(back.notes) == sorted(piece.notes)
    assert back.title == "rt"


@settings(max_examples=60, deadline=None)
@given(notes_st)
def test_text_round_trip(notes):
    piece = Piece(notes, 4, 3, "t")
    assert parse_pointset_text(write_pointset_text(piece)) == piece


def test_quarter_note_at_eighth_grid():
    # C4 quarter note, PPQN 480, delta times in ticks
    body = bytes([0x00, 0x90, 60, 100, 0x83, 0x60, 0x80, 60, 0, 0x00, 0xFF, 0x2F, 0x00])
    piece = parse_midi(_smf([body]), tatums_per_beat=2)
    assert piece.notes == (NoteEvent(0, 2, 60, 100, 0),)


def test_grid_inference_picks_coarsest_exact_grid():
    # two notes of 160 ticks: triplet eighths need three tatums per beat
    body = bytes([0x00, 0x90, 60, 90, 0x81, 0x20, 0x80, 60, 0,
                  0x00, 0x90, 62, 90, 0x81, 0x20, 0x80, 62, 0, 0x00, 0xFF, 0x2F, 0x00])
    piece = parse_midi(_smf([body]))
    assert piece.tatums_per_beat == 3
    assert [(n.onset, n.duration) for n in piece.notes] == [(0, 1), (1, 1)]


def test_running_status_and_zero_velocity_note_off():
    body = bytes([0x00, 0x90, 60, 100, 0x60, 60, 0, 0x00, 64, 90, 0x60, 64, 0,
                  0x00, 0xFF, 0x2F, 0x00])
    piece = parse_midi(_smf([body], ppqn=96), tatums_per_beat=1)
    assert [(n.onset, n.midi_pitch) for n in piece.notes] == [(0, 60), (1, 64)]


def test_format0_track_is_channel():
    body = bytes([0x00, 0x90, 60, 100, 0x00, 0x93, 48, 100, 0x83, 0x60, 0x80, 60, 0,
                  0x00, 0x83, 48, 0, 0x00, 0xFF, 0x2F, 0x00])
    piece = parse_midi(_smf([body], fmt=0), tatums_per_beat=2)
    assert {(n.midi_pitch, n.track) for n in piece.notes} == {(60, 0), (48, 3)}


def test_midi_errors_carry_offsets():
    with pytest.raises(MidiParseError) as exc:
        parse_midi(b"RIFF0000000000")
    assert exc.value.offset == 0
    truncated = _smf([bytes([0x00, 0x90, 60, 100, 0x10, 0x80, 60, 0, 0x00, 0xFF, 0x2F, 0x00])])
    with pytest.raises(MidiParseError):
        parse_midi(truncated[:-6])


def test_overlapping_note_on_names_pitch_and_tick():
    body = bytes([0x00, 0x90, 61, 100, 0x60, 0x90, 61, 90, 0x00, 0xFF, 0x2F, 0x00])
    with pytest.raises(NotePairingError, match="pitch 61 at tick 96"):
        parse_midi(_smf([body]))


def test_note_without_off_ends_with_track():
    body = bytes([0x00, 0x90, 61, 100, 0x83, 0x60, 0xFF, 0x2F, 0x00])
    piece = parse_midi(_smf([body]), tatums_per_beat=2)
    assert piece.notes == (NoteEvent(0, 2, 61, 100, 0),)


def test_overlapping_unisons_survive_round_trip():
    piece = Piece([NoteEvent(0, 4, 60), NoteEvent(1, 1, 60), NoteEvent(2, 1, 60)], 2)
    assert parse_midi(write_midi(piece)).notes == piece.notes


def test_empty_piece():
    piece = Piece()
    assert piece.length == 0
    assert parse_midi(write_midi(piece)).notes == ()
    assert to_pointset(piece).points == ()
    assert slices(piece) == []


def test_points_at_ppqn_grid_parse():
    text = "".join(f"{t} 120 {p} 80 0\n" for t, p in
                   [(360, 72), (480, 71), (600, 75), (720, 76), (840, 70)])
    piece = parse_pointset_text("# tatums_per_beat=480\n" + text)
    assert to_pointset(piece).points[0] == (360, 72)
    assert piece.tatums_per_beat == 480


def test_pointset_collapses_duplicates_and_maps_back():
    piece = Piece([NoteEvent(0, 2, 60, 80, 0), NoteEvent(0, 1, 60, 70, 1),
                   NoteEvent(1, 1, 62)])
    ps = to_pointset(piece)
    assert ps.points == ((0, 60), (1, 62))
    assert len(ps.notes_at((0, 60))) == 2


def test_slices_group_by_onset():
    piece = Piece([NoteEvent(0, 1, 60), NoteEvent(0, 1, 64), NoteEvent(3, 1, 62)])
    assert [(s.onset, s.note_indices) for s in slices(piece)] == [(0, (0, 1)), (3, (2,))]


@pytest.mark.parametrize("line, lineno", [("0 1 60 80", 2), ("0 1 x 80 0", 2),
                                          ("0 0 60 80 0", 2)])
def test_text_errors_name_line(line, lineno):
    with pytest.raises(TextParseError) as exc:
        parse_pointset_text("# title=x\n" + line + "\n")
    assert exc.value.line == lineno


@pytest.mark.parametrize("kwargs", [dict(onset=-1), dict(duration=0), dict(midi_pitch=128),
                                    dict(velocity=200), dict(track=-2)])
def test_note_validation(kwargs):
    base = dict(onset=0, duration=1, midi_pitch=60, velocity=80, track=0)
    base.update(kwargs)
    with pytest.raises(ScoreError):
        NoteEvent(**base)


def test_with_pitches_keeps_rhythm():
    piece = Piece([NoteEvent(0, 1, 60), NoteEvent(2, 3, 64, 90, 1)])
    out = piece.with_pitches([50, 70])
    assert [(n.onset, n.duration, n.velocity, n.track) for n in out.notes] == \
        [(0, 1, 80, 0), (2, 3, 90, 1)]
    with pytest.raises(ScoreError):
        piece.with_pitches([1])
