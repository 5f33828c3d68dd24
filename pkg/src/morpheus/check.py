"""Post-hoc verification of a generated piece against its template.

Works from files alone (template, output MIDI, TEC list): it does not trust
any note correspondence kept by the optimizer. Output notes are matched to
template notes by onset, duration, track and velocity; chords are matched
by search, so a valid output is accepted whatever the order of its notes.
"""
from __future__ import annotations

from itertools import permutations
from typing import Iterable

from .patterns import Tec
from .score import Piece


def _components(template: Piece, tecs: Iterable[Tec]) -> list[int]:
    index: dict[tuple[int, int], list[int]] = {}
    for i, n in enumerate(template.notes):
        index.setdefault((n.onset, n.midi_pitch), []).append(i)
    parent = list(range(len(template.notes)))

    def find(a):
        while parent[a] != a:
            a = parent[a]
        return a

    def join(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for notes in index.values():
        for other in notes[1:]:
            join(notes[0], other)
    for tec in tecs:
        for v in tec.translators:
            for p in tec.pattern:
                q = (p[0] + v[0], p[1] + v[1])
                if p not in index or q not in index:
                    raise ValueError(f"TEC point {p} or {q} is not a template note")
                join(index[p][0], index[q][0])
    return [find(i) for i in range(len(template.notes))]


def check_output(template: Piece, output: Piece, tecs: Iterable[Tec],
                 ranges: dict[int, tuple[int, int]] | None = None) -> list[str]:
    """List every violated constraint (empty when the output is valid).

    Checks that rhythm, dynamics and tracks are unchanged, that every output
    pitch lies in its track's template range, and that all notes linked by a
    TEC translator moved by the same interval.
    """
    problems: list[str] = []
    if ranges is None:
        ranges = {}
        for n in template.notes:
            lo, hi = ranges.get(n.track, (n.midi_pitch, n.midi_pitch))
            ranges[n.track] = (min(lo, n.midi_pitch), max(hi, n.midi_pitch))
    for n in output.notes:
        lo, hi = ranges.get(n.track, (None, None))
        if lo is None or not lo <= n.midi_pitch <= hi:
            problems.append(f"range: pitch {n.midi_pitch} at onset {n.onset} "
                            f"track {n.track} outside {lo}..{hi}")

    def slot(n):
        return (n.onset, n.duration, n.track, n.velocity)

    tmpl_groups: dict[tuple, list[int]] = {}
    for i, n in enumerate(template.notes):
        tmpl_groups.setdefault(slot(n), []).append(i)
    out_groups: dict[tuple, list[int]] = {}
    for n in output.notes:
        out_groups.setdefault(slot(n), []).append(n.midi_pitch)
    if {k: len(v) for k, v in tmpl_groups.items()} != {k: len(v) for k, v in out_groups.items()}:
        problems.append("rhythm: output notes do not match template onsets/durations/tracks")
        return problems

    comp = _components(template, tecs)
    tpitch = template.pitches()
    order = sorted(tmpl_groups)
    shift: dict[int, int] = {}

    def solve(g: int) -> bool:
        if g == len(order):
            return True
        notes = tmpl_groups[order[g]]
        tried = set()
        for perm in permutations(out_groups[order[g]]):
            if perm in tried:
                continue
            tried.add(perm)
            added = []
            ok = True
            for i, p in zip(notes, perm):
                s = p - tpitch[i]
                c = comp[i]
                if c in shift:
                    if shift[c] != s:
                        ok = False
                        break
                else:
                    shift[c] = s
                    added.append(c)
            if ok and solve(g + 1):
                return True
            for c in added:
                del shift[c]
        return False

    if not solve(0):
        problems.append("pattern: no note matching keeps every TEC occurrence an exact transposition")
    return problems
