"""Score model: tatum-quantized notes, MIDI / text I/O and the point-set view."""
from __future__ import annotations

import re
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

DEFAULT_TATUMS_PER_BEAT = 2  # eighth-note grid
DEFAULT_PPQN = 480
_GRID_CANDIDATES = tuple(range(1, 49))
_META_PREFIX = "morpheus:"


class ScoreError(ValueError):
    pass


class MidiParseError(ScoreError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class NotePairingError(ScoreError):
    def __init__(self, pitch: int, tick: int, track: int):
        super().__init__(
            f"note-on for pitch {pitch} at tick {tick} (track {track}) "
            "overlaps an unterminated note-on of the same pitch")
        self.pitch = pitch
        self.tick = tick


class TextParseError(ScoreError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True, order=True)
class NoteEvent:
    onset: int
    duration: int
    midi_pitch: int
    velocity: int = 80
    track: int = 0

    def __post_init__(self):
        for name in ("onset", "duration", "midi_pitch", "velocity", "track"):
            if not isinstance(getattr(self, name), int):
                raise ScoreError(f"{name} must be an integer")
        if self.onset < 0:
            raise ScoreError(f"negative onset {self.onset}")
        if self.duration < 1:
            raise ScoreError(f"duration must be >= 1, got {self.duration}")
        if not 0 <= self.midi_pitch <= 127:
            raise ScoreError(f"midi pitch {self.midi_pitch} outside 0-127")
        if not 0 <= self.velocity <= 127:
            raise ScoreError(f"velocity {self.velocity} outside 0-127")
        if self.track < 0:
            raise ScoreError(f"negative track {self.track}")

    @property
    def offset(self) -> int:
        return self.onset + self.duration

    def sort_key(self) -> tuple[int, int, int, int, int]:
        return (self.onset, self.midi_pitch, self.track, self.duration, self.velocity)

    def with_pitch(self, midi_pitch: int) -> "NoteEvent":
        return NoteEvent(self.onset, self.duration, midi_pitch, self.velocity, self.track)


@dataclass(frozen=True)
class Piece:
    notes: tuple[NoteEvent, ...] = ()
    tatums_per_beat: int = DEFAULT_TATUMS_PER_BEAT
    beats_per_bar: Fraction = Fraction(4)
    title: str = ""

    def __post_init__(self):
        if self.tatums_per_beat < 1:
            raise ScoreError("tatums_per_beat must be >= 1")
        object.__setattr__(self, "beats_per_bar", Fraction(self.beats_per_bar))
        object.__setattr__(self, "notes", tuple(sorted(self.notes, key=NoteEvent.sort_key)))

    def __len__(self) -> int:
        return len(self.notes)

    @property
    def length(self) -> int:
        """End of the last sounding note, in tatums."""
        return max((n.offset for n in self.notes), default=0)

    @property
    def tracks(self) -> list[int]:
        return sorted({n.track for n in self.notes})

    def pitches(self) -> list[int]:
        return [n.midi_pitch for n in self.notes]

    def with_pitches(self, pitches: Sequence[int]) -> "Piece":
        """Same rhythm, dynamics and tracks with new pitches.

        ``pitches`` follows this piece's note order; the result is re-sorted.
        """
        if len(pitches) != len(self.notes):
            raise ScoreError(f"expected {len(self.notes)} pitches, got {len(pitches)}")
        notes = [n.with_pitch(int(p)) for n, p in zip(self.notes, pitches)]
        return Piece(notes, self.tatums_per_beat, self.beats_per_bar, self.title)

    def canonical(self) -> "Piece":
        return Piece(self.notes, self.tatums_per_beat, self.beats_per_bar, self.title)

    def transpose(self, semitones: int) -> "Piece":
        return Piece([n.with_pitch(n.midi_pitch + semitones) for n in self.notes],
                     self.tatums_per_beat, self.beats_per_bar, self.title)


@dataclass(frozen=True)
class TimeSlice:
    onset: int
    note_indices: tuple[int, ...]


def slices(piece: Piece) -> list[TimeSlice]:
    groups: dict[int, list[int]] = {}
    for i, n in enumerate(piece.notes):
        groups.setdefault(n.onset, []).append(i)
    return [TimeSlice(t, tuple(ix)) for t, ix in sorted(groups.items())]


@dataclass(frozen=True)
class PointSet:
    """Distinct ``(onset, pitch)`` points with a back-map to note indices."""

    points: tuple[tuple[int, int], ...]
    note_map: dict = field(default_factory=dict, compare=False, hash=False)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, p) -> bool:
        return tuple(p) in self.note_map

    def notes_at(self, p) -> tuple[int, ...]:
        return self.note_map[tuple(p)]


def to_pointset(piece: Piece) -> PointSet:
    back: dict[tuple[int, int], list[int]] = {}
    for i, n in enumerate(piece.notes):
        back.setdefault((n.onset, n.midi_pitch), []).append(i)
    pts = tuple(sorted(back))
    return PointSet(pts, {p: tuple(back[p]) for p in pts})


# -- plain-text point-set format ----------------------------------------------

_PRAGMA = re.compile(r"#\s*(tatums_per_beat|beats_per_bar|title)\s*=\s*(.*)$")


def parse_pointset_text(text: str) -> Piece:
    """Parse ``onset duration midi_pitch velocity track`` lines.

    ``#`` starts a comment. Comments of the form ``# tatums_per_beat=N``,
    ``# beats_per_bar=Q`` and ``# title=...`` set piece attributes.
    """
    notes = []
    meta: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _PRAGMA.match(line)
            if m:
                key, value = m.group(1), m.group(2).strip()
                try:
                    if key == "tatums_per_beat":
                        meta[key] = int(value)
                    elif key == "beats_per_bar":
                        meta[key] = Fraction(value)
                    else:
                        meta[key] = value
                except ValueError:
                    raise TextParseError(f"bad {key} value {value!r}", lineno) from None
            continue
        body = line.split("#", 1)[0].split()
        if len(body) != 5:
            raise TextParseError(f"expected 5 fields, got {len(body)}", lineno)
        try:
            fields = [int(f) for f in body]
        except ValueError:
            raise TextParseError(f"non-integer field in {line!r}", lineno) from None
        try:
            notes.append(NoteEvent(*fields))
        except ScoreError as exc:
            raise TextParseError(str(exc), lineno) from None
    return Piece(notes, **meta)


def write_pointset_text(piece: Piece) -> str:
    lines = [f"# tatums_per_beat={piece.tatums_per_beat}",
             f"# beats_per_bar={piece.beats_per_bar}"]
    if piece.title:
        lines.append(f"# title={piece.title}")
    lines.extend(f"{n.onset} {n.duration} {n.midi_pitch} {n.velocity} {n.track}"
                 for n in sorted(piece.notes, key=NoteEvent.sort_key))
    return "\n".join(lines) + "\n"


# -- Standard MIDI File -------------------------------------------------------

def _read_varlen(data: bytes, pos: int, end: int) -> tuple[int, int]:
    value = 0
    for _ in range(4):
        if pos >= end:
            raise MidiParseError("truncated variable-length quantity", pos)
        b = data[pos]
        pos += 1
        value = (value << 7) | (b & 0x7F)
        if not b & 0x80:
            return value, pos
    raise MidiParseError("variable-length quantity longer than 4 bytes", pos)


def _varlen(value: int) -> bytes:
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(out))


@dataclass
class _RawNote:
    start: int
    end: int
    pitch: int
    velocity: int
    track: int


def _parse_track(data: bytes, pos: int, end: int, track_no: int, fmt: int,
                 raw: list[_RawNote], meta: dict) -> None:
    tick = 0
    status = None
    open_notes: dict[tuple[int, int], tuple[int, int]] = {}
    while pos < end:
        delta, pos = _read_varlen(data, pos, end)
        tick += delta
        if pos >= end:
            raise MidiParseError("truncated event", pos)
        b = data[pos]
        if b & 0x80:
            status = b
            pos += 1
        elif status is None or status >= 0xF0:
            raise MidiParseError("data byte without running status", pos)
        if status == 0xFF:
            if pos >= end:
                raise MidiParseError("truncated meta event", pos)
            mtype = data[pos]
            length, pos = _read_varlen(data, pos + 1, end)
            if pos + length > end:
                raise MidiParseError("meta event overruns track", pos)
            payload = data[pos:pos + length]
            pos += length
            if mtype == 0x2F:
                break
            if mtype == 0x58 and length >= 2:
                meta.setdefault("beats_per_bar", Fraction(payload[0]) * Fraction(4, 2 ** payload[1]))
            elif mtype == 0x03 and track_no == 0 and "title" not in meta:
                meta["title"] = payload.decode("utf-8", "replace")
            elif mtype == 0x01:
                text = payload.decode("utf-8", "replace")
                if text.startswith(_META_PREFIX + "tatums_per_beat="):
                    meta["tatums_per_beat"] = int(text.split("=", 1)[1])
            status = None
            continue
        if status in (0xF0, 0xF7):
            length, pos = _read_varlen(data, pos, end)
            pos += length
            status = None
            continue
        kind = status & 0xF0
        nbytes = 1 if kind in (0xC0, 0xD0) else 2
        if pos + nbytes > end:
            raise MidiParseError("truncated channel event", pos)
        d1 = data[pos]
        d2 = data[pos + 1] if nbytes == 2 else 0
        pos += nbytes
        channel = status & 0x0F
        track = channel if fmt == 0 else track_no
        if kind == 0x90 and d2 > 0:
            if (channel, d1) in open_notes:
                raise NotePairingError(d1, tick, track)
            open_notes[(channel, d1)] = (tick, d2)
        elif kind == 0x80 or (kind == 0x90 and d2 == 0):
            started = open_notes.pop((channel, d1), None)
            if started is not None:
                raw.append(_RawNote(started[0], tick, d1, started[1], track))
    for (channel, pitch), (start, vel) in sorted(open_notes.items()):
        raw.append(_RawNote(start, tick, pitch, vel,
                            channel if fmt == 0 else track_no))


def _quantize(tick: int, ticks_per_tatum: Fraction) -> int:
    q = Fraction(tick) / ticks_per_tatum
    lo = q.numerator // q.denominator
    # ties round down
    return lo + 1 if q - lo > Fraction(1, 2) else lo


def _infer_grid(ppqn: int, ticks: Iterable[int]) -> int:
    ticks = set(ticks)
    for tpb in _GRID_CANDIDATES:
        if tpb < DEFAULT_TATUMS_PER_BEAT:
            continue
        step = Fraction(ppqn, tpb)
        if all((Fraction(t) / step).denominator == 1 for t in ticks):
            return tpb
    return DEFAULT_TATUMS_PER_BEAT


def parse_midi(data: bytes, tatums_per_beat: int | None = None) -> Piece:
    """Read a format 0 or 1 Standard MIDI File into a tatum-quantized Piece.

    The grid comes from ``tatums_per_beat`` when given, else from a marker
    written by :func:`write_midi`, else the coarsest grid of at least an
    eighth note on which every note boundary falls exactly (eighth notes with
    rounding when none does).
    """
    data = bytes(data)
    if len(data) < 14 or data[:4] != b"MThd":
        raise MidiParseError("missing MThd header", 0)
    hlen = struct.unpack(">I", data[4:8])[0]
    if hlen < 6 or 8 + hlen > len(data):
        raise MidiParseError("bad header length", 4)
    fmt, ntracks, division = struct.unpack(">HHH", data[8:14])
    if fmt not in (0, 1):
        raise MidiParseError(f"unsupported SMF format {fmt}", 8)
    if division & 0x8000:
        raise MidiParseError("SMPTE time division not supported", 12)
    ppqn = division
    if ppqn == 0:
        raise MidiParseError("zero PPQN", 12)
    pos = 8 + hlen
    raw: list[_RawNote] = []
    meta: dict = {}
    track_no = 0
    while pos < len(data) and track_no < ntracks:
        if pos + 8 > len(data):
            raise MidiParseError("truncated chunk header", pos)
        ctype = data[pos:pos + 4]
        clen = struct.unpack(">I", data[pos + 4:pos + 8])[0]
        body = pos + 8
        if body + clen > len(data):
            raise MidiParseError("chunk overruns file", pos + 4)
        if ctype == b"MTrk":
            _parse_track(data, body, body + clen, track_no, fmt, raw, meta)
            track_no += 1
        pos = body + clen
    if track_no < ntracks:
        raise MidiParseError(f"expected {ntracks} tracks, found {track_no}", pos)

    tpb = tatums_per_beat or meta.get("tatums_per_beat")
    if tpb is None:
        tpb = _infer_grid(ppqn, [t for r in raw for t in (r.start, r.end)])
    step = Fraction(ppqn, tpb)
    notes = []
    for r in raw:
        on = _quantize(r.start, step)
        off = _quantize(r.end, step)
        notes.append(NoteEvent(on, max(1, off - on), r.pitch, r.velocity, r.track))
    return Piece(notes, tpb, meta.get("beats_per_bar", Fraction(4)), meta.get("title", ""))


def _ppqn_for(tpb: int) -> int:
    if DEFAULT_PPQN % tpb == 0:
        return DEFAULT_PPQN
    mult = -(-DEFAULT_PPQN // tpb)
    ppqn = tpb * mult
    if ppqn > 0x7FFF:
        ppqn = tpb
    return ppqn


def _time_signature(beats_per_bar: Fraction) -> bytes:
    # numerator / 2**denominator_power with beats counted in quarter notes
    value = Fraction(beats_per_bar)
    for power in range(0, 7):
        num = value * Fraction(2 ** power, 4)
        if num.denominator == 1 and 1 <= num.numerator <= 255:
            return bytes([num.numerator, power, 24, 8])
    return bytes([4, 2, 24, 8])


def _track_chunk(events: list[tuple[int, int, bytes]]) -> bytes:
    events.sort(key=lambda e: (e[0], e[1]))
    body = bytearray()
    now = 0
    for tick, _, payload in events:
        body += _varlen(tick - now) + payload
        now = tick
    body += b"\x00\xff\x2f\x00"
    return b"MTrk" + struct.pack(">I", len(body)) + bytes(body)


def _meta(mtype: int, payload: bytes) -> bytes:
    return bytes([0xFF, mtype]) + _varlen(len(payload)) + payload


def write_midi(piece: Piece) -> bytes:
    """Format-1 SMF with one MIDI track per ``track`` value.

    Velocity-0 notes are written with velocity 1, since a zero-velocity
    note-on is a note-off.
    """
    tpb = piece.tatums_per_beat
    ppqn = _ppqn_for(tpb)
    ticks_per_tatum = ppqn // tpb
    ntracks = max(piece.tracks, default=0) + 1
    per_track: list[list[tuple[int, int, bytes]]] = [[] for _ in range(ntracks)]
    head = per_track[0]
    if piece.title:
        head.append((0, 0, _meta(0x03, piece.title.encode("utf-8"))))
    head.append((0, 0, _meta(0x01, f"{_META_PREFIX}tatums_per_beat={tpb}".encode())))
    head.append((0, 0, _meta(0x58, _time_signature(piece.beats_per_bar))))
    head.append((0, 0, _meta(0x51, (500000).to_bytes(3, "big"))))
    busy: dict[tuple[int, int, int], int] = {}
    for n in piece.notes:
        start = n.onset * ticks_per_tatum
        end = n.offset * ticks_per_tatum
        # overlapping unisons in one track go to another channel so they pair back up
        for step in range(16):
            channel = (n.track + step) % 16
            if busy.get((n.track, channel, n.midi_pitch), 0) <= start:
                break
        else:
            raise ScoreError(f"more than 16 overlapping notes of pitch {n.midi_pitch} "
                             f"in track {n.track}")
        busy[(n.track, channel, n.midi_pitch)] = end
        # note-offs sort before note-ons at the same tick
        per_track[n.track].append((start, 2, bytes([0x90 | channel, n.midi_pitch, max(1, n.velocity)])))
        per_track[n.track].append((end, 1, bytes([0x80 | channel, n.midi_pitch, 0])))
    header = b"MThd" + struct.pack(">IHHH", 6, 1, ntracks, ppqn)
    return header + b"".join(_track_chunk(evts) for evts in per_track)


def read_piece(path, tatums_per_beat: int | None = None) -> Piece:
    """Load a piece from a MIDI file or a point-set text file."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] == b"MThd":
        return parse_midi(data, tatums_per_beat)
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ScoreError(f"{path}: neither MIDI nor UTF-8 text") from exc
    piece = parse_pointset_text(text)
    if tatums_per_beat and tatums_per_beat != piece.tatums_per_beat:
        raise ScoreError("cannot regrid a point-set text file")
    return piece
