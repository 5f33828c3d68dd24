"""Pitch assignment for a fixed template rhythm, solved by variable
neighborhood search.

Only one pitch per group of pattern-linked notes is free. Every other note
in the group follows at the interval it had in the template, so pattern
repetitions stay exact transpositions no matter what the search does.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Mapping, Sequence

import numpy as np

from .patterns import Cover
from .score import Piece, TimeSlice, slices, to_pointset
from .spiral import DEFAULT_CONFIG, KeyRep, SpiralConfig, global_key
from .tension import (DEFAULT_SEGMENT_BEATS, SegmentLayout, TensionProfile,
                      profile_distance, profile_from_spelling, sequence_measures)

CHANGE1 = "change1"
CHANGE_SLICE = "changeSlice"
SWAP = "swap"
NEIGHBORHOODS = (CHANGE1, CHANGE_SLICE, SWAP)
DEFAULT_PENALTY = 1e6
PERTURB_FRACTION = 0.12
BACKTRACK_SLICES = 4
MEMO_LIMIT = 200_000
_EPS = 1e-12


class ProblemError(ValueError):
    pass


class InfeasibleError(ProblemError):
    def __init__(self, note_index: int, message: str):
        super().__init__(f"note {note_index}: {message}")
        self.note_index = note_index


@dataclass(frozen=True)
class NeighborhoodSpec:
    kind: str
    size: Callable[[int, int, int], int]


NEIGHBORHOOD_SPECS = {
    CHANGE1: NeighborhoodSpec(CHANGE1, lambda n, m, p: m * n * p),
    SWAP: NeighborhoodSpec(SWAP, lambda n, m, p: math.factorial(max(n * m - 1, 0))),
    CHANGE_SLICE: NeighborhoodSpec(CHANGE_SLICE, lambda n, m, p: p * p),
}


def track_ranges(piece: Piece) -> dict[int, tuple[int, int]]:
    """Lowest and highest template pitch per track."""
    out: dict[int, tuple[int, int]] = {}
    for n in piece.notes:
        lo, hi = out.get(n.track, (n.midi_pitch, n.midi_pitch))
        out[n.track] = (min(lo, n.midi_pitch), max(hi, n.midi_pitch))
    return out


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


@dataclass
class MorphProblem:
    template: Piece
    cover: Cover
    target: TensionProfile
    ranges: dict[int, tuple[int, int]]
    fixed: dict[int, int]
    weights: tuple[float, float, float]
    penalty: float
    segment_beats: Fraction
    distance: str
    key: KeyRep
    config: SpiralConfig
    var_root: list[int]
    var_notes: list[list[int]]
    var_range: list[tuple[int, int]]
    note_var: list[int]
    note_offset: list[int]
    layout: SegmentLayout = field(repr=False)
    time_slices: list[TimeSlice] = field(repr=False)
    slice_vars: list[list[int]] = field(repr=False)

    @property
    def n_free(self) -> int:
        """Number of pitches the search decides (UP)."""
        return len(self.var_root)

    def realize(self, free_pitches: Sequence[int]) -> list[int]:
        """Pitch of every template note, in template note order."""
        return [int(free_pitches[v]) + off for v, off in zip(self.note_var, self.note_offset)]

    def to_piece(self, assignment: "Assignment") -> Piece:
        return self.template.with_pitches(self.realize(assignment.free_pitches))

    def template_assignment(self) -> "Assignment":
        return Assignment(tuple(self.template.notes[r].midi_pitch for r in self.var_root))

    def is_feasible(self, assignment: "Assignment") -> bool:
        if len(assignment.free_pitches) != self.n_free:
            return False
        return all(lo <= x <= hi for x, (lo, hi) in zip(assignment.free_pitches, self.var_range))

    def neighborhood_sizes(self) -> dict[str, int]:
        n = len(self.time_slices)
        m = max((len(s.note_indices) for s in self.time_slices), default=0)
        p = max((hi - lo + 1 for lo, hi in self.ranges.values()), default=0)
        return {k: hood.size(n, m, p) for k, hood in NEIGHBORHOOD_SPECS.items()}

    def summary(self) -> dict:
        return {
            "notes": len(self.template.notes),
            "UP": self.n_free,
            "TECs": len(self.cover.tecs),
            "CR": round(self.cover.compression_ratio, 6),
            "segments": self.layout.n_segments,
            "key": self.key.name,
            "ranges": {str(t): list(r) for t, r in sorted(self.ranges.items())},
            "fixed": len(self.fixed),
        }


@dataclass(frozen=True)
class Assignment:
    free_pitches: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "free_pitches", tuple(int(x) for x in self.free_pitches))


def link_variables(template: Piece, cover: Cover
                   ) -> tuple[list[int], list[int], list[int]]:
    """Group notes that must move together.

    Returns ``(var_root, note_var, note_offset)``: the root note of each free
    variable (in note order), the variable of every note, and every note's
    template interval above its root.
    """
    ps = to_pointset(template)
    covered = cover.covered()
    points = set(ps.points)
    if covered != points:
        missing = sorted(points - covered)[:3]
        extra = sorted(covered - points)[:3]
        raise ProblemError(f"cover does not match template points "
                           f"(uncovered {missing}, foreign {extra})")
    n_notes = len(template.notes)
    uf = _UnionFind(n_notes)
    for notes in ps.note_map.values():
        for other in notes[1:]:
            uf.union(notes[0], other)
    for tec in cover.tecs:
        for v in tec.translators[1:]:
            for p in tec.pattern:
                q = (p[0] + v[0], p[1] + v[1])
                uf.union(ps.notes_at(p)[0], ps.notes_at(q)[0])

    roots: dict[int, int] = {}
    for tec in cover.tecs:
        for p in tec.pattern:
            note = ps.notes_at(p)[0]
            roots.setdefault(uf.find(note), note)
    for p in sorted(cover.residual):
        note = ps.notes_at(p)[0]
        roots.setdefault(uf.find(note), note)
    for i in range(n_notes):
        roots.setdefault(uf.find(i), i)

    var_root = sorted(roots.values())
    var_of_comp = {uf.find(r): v for v, r in enumerate(var_root)}
    note_var = [var_of_comp[uf.find(i)] for i in range(n_notes)]
    pitches = template.pitches()
    note_offset = [pitches[i] - pitches[var_root[note_var[i]]] for i in range(n_notes)]
    return var_root, note_var, note_offset


def count_free(template: Piece, cover: Cover) -> int:
    """UP: how many pitches remain to be chosen under ``cover``."""
    if not template.notes:
        return 0
    return len(link_variables(template, cover)[0])


def build_problem(template: Piece, cover: Cover, target: TensionProfile | None = None, *,
                  weights: Sequence[float] = (1.0, 1.0, 1.0),
                  penalty: float = DEFAULT_PENALTY,
                  fixed: Mapping[int, int] | None = None,
                  segment_beats=DEFAULT_SEGMENT_BEATS,
                  distance: str = "l1",
                  ranges: Mapping[int, tuple[int, int]] | None = None,
                  key: KeyRep | None = None,
                  config: SpiralConfig = DEFAULT_CONFIG) -> MorphProblem:
    """Turn a template and its pattern cover into a search problem.

    Notes sharing a point, and notes linked by any TEC translator, form one
    group with one free pitch. The group's root is the first note a TEC
    lists in its identity occurrence (TECs in cover order).
    """
    if not template.notes:
        raise ProblemError("template has no notes")
    var_root, note_var, note_offset = link_variables(template, cover)
    n_notes = len(template.notes)
    var_notes: list[list[int]] = [[] for _ in var_root]
    for i, v in enumerate(note_var):
        var_notes[v].append(i)
    pitches = template.pitches()

    ranges = dict(ranges) if ranges is not None else track_ranges(template)
    var_range = []
    for v, notes in enumerate(var_notes):
        lo, hi = 0, 127
        for i in notes:
            n = template.notes[i]
            if n.track not in ranges:
                raise InfeasibleError(i, f"no pitch range for track {n.track}")
            tlo, thi = ranges[n.track]
            lo = max(lo, tlo - note_offset[i], -note_offset[i])
            hi = min(hi, thi - note_offset[i], 127 - note_offset[i])
        if lo > hi:
            raise InfeasibleError(var_root[v], "no pitch keeps every linked note inside its track range")
        var_range.append((lo, hi))

    fixed = {int(k): int(p) for k, p in (fixed or {}).items()}
    wanted: dict[int, tuple[int, int]] = {}
    for i, p in sorted(fixed.items()):
        if not 0 <= i < n_notes:
            raise ProblemError(f"fixed pitch for unknown note {i}")
        v = note_var[i]
        x = p - note_offset[i]
        lo, hi = var_range[v]
        if not lo <= x <= hi:
            raise InfeasibleError(i, f"fixed pitch {p} is unreachable within the pitch ranges")
        if wanted.setdefault(v, (x, i))[0] != x:
            raise InfeasibleError(i, f"fixed pitch {p} contradicts the fixed pitch of note "
                                     f"{wanted[v][1]} under the pattern constraints")

    key = key or global_key(template, config)
    layout = SegmentLayout(template, segment_beats)
    if target is None:
        ks = layout.spell_all(pitches, key, config)
        target = profile_from_spelling(layout, ks, key, config)
    for name in ("diameter", "momentum", "strain"):
        if len(getattr(target, name)) != layout.n_segments:
            raise ProblemError(f"target {name} has {len(getattr(target, name))} segments, "
                               f"template needs {layout.n_segments}")
    if distance not in ("l1", "l2"):
        raise ProblemError(f"unknown distance {distance!r}")

    time_slices = slices(template)
    slice_of_note = {}
    for s, ts in enumerate(time_slices):
        for i in ts.note_indices:
            slice_of_note[i] = s
    slice_vars: list[list[int]] = [[] for _ in time_slices]
    for v, r in enumerate(var_root):
        slice_vars[slice_of_note[r]].append(v)

    return MorphProblem(
        template=template, cover=cover, target=target, ranges=ranges, fixed=fixed,
        weights=tuple(float(w) for w in weights), penalty=float(penalty),
        segment_beats=Fraction(segment_beats), distance=distance, key=key, config=config,
        var_root=var_root, var_notes=var_notes, var_range=var_range,
        note_var=note_var, note_offset=note_offset, layout=layout,
        time_slices=time_slices, slice_vars=slice_vars)


def realized_profile(problem: MorphProblem, assignment: Assignment) -> TensionProfile:
    """Tension profile of an assignment, measured against the template key."""
    layout = problem.layout
    ks = layout.spell_all(problem.realize(assignment.free_pitches), problem.key, problem.config)
    return profile_from_spelling(layout, ks, problem.key, problem.config)


def objective(problem: MorphProblem, assignment: Assignment) -> float:
    """Weighted tension distance to the target plus fixed-pitch penalties."""
    prof = realized_profile(problem, assignment)
    d = profile_distance(prof, problem.target, problem.weights, problem.distance)
    pitches = problem.realize(assignment.free_pitches)
    violations = sum(1 for i, p in problem.fixed.items() if pitches[i] != p)
    return d + problem.penalty * violations


class Evaluator:
    """Objective with incremental updates.

    A pitch change only touches the windows its notes (and the notes spelled
    alongside them) sound in, plus momentum and strain up to the next
    non-empty window. :meth:`propose` applies a change and returns the new
    objective; follow it with :meth:`commit` or :meth:`revert`.
    """

    def __init__(self, problem: MorphProblem, assignment: Assignment):
        if not problem.is_feasible(assignment):
            raise InfeasibleError(-1, "starting assignment violates a pitch range")
        self.problem = problem
        self.layout = lay = problem.layout
        self.x = list(assignment.free_pitches)
        self.pitches = problem.realize(self.x)
        self.ks = lay.spell_all(self.pitches, problem.key, problem.config)
        n = lay.n_segments
        stats = [lay.segment_stats(j, self.ks, problem.config) for j in range(n)]
        self.diam = [d for d, _ in stats]
        self.ce = [c for _, c in stats]
        self.mom, self.strain = sequence_measures(self.ce, problem.key.position)
        self.targets = [list(map(float, v)) for v in problem.target.vectors()]
        self.square = problem.distance == "l2"
        self.violations = sum(1 for i, p in problem.fixed.items() if self.pitches[i] != p)
        nonempty = lay.nonempty
        self.next_nonempty = [n] * n
        nxt = n
        for j in range(n - 1, -1, -1):
            self.next_nonempty[j] = nxt
            if nonempty[j]:
                nxt = j
        self.prev_nonempty = [-1] * n
        prv = -1
        for j in range(n):
            self.prev_nonempty[j] = prv
            if nonempty[j]:
                prv = j
        self._resum()
        self._undo = None

    def _term(self, measure: int, j: int, value: float) -> float:
        d = value - self.targets[measure][j]
        return d * d if self.square else abs(d)

    def _resum(self) -> None:
        series = (self.diam, self.mom, self.strain)
        self.sums = [math.fsum(self._term(i, j, v) for j, v in enumerate(series[i]))
                     for i in range(3)]
        self.objective = self._combine(self.sums, self.violations)

    def _combine(self, sums: Sequence[float], violations: int) -> float:
        a = self.problem.weights
        if self.square:
            d = sum(w * math.sqrt(max(s, 0.0)) for w, s in zip(a, sums))
        else:
            d = sum(w * s for w, s in zip(a, sums))
        return d + self.problem.penalty * violations

    def assignment(self) -> Assignment:
        return Assignment(tuple(self.x))

    def propose(self, changes: Sequence[tuple[int, int]]) -> float:
        prob, lay = self.problem, self.layout
        cfg, key = prob.config, prob.key
        old_x = [(v, self.x[v]) for v, _ in changes]
        old_pitch = {}
        violations = self.violations
        groups = set()
        for v, new in changes:
            self.x[v] = new
            for i in prob.var_notes[v]:
                if i not in old_pitch:
                    old_pitch[i] = self.pitches[i]
                p = new + prob.note_offset[i]
                want = prob.fixed.get(i)
                if want is not None:
                    violations += (p != want) - (self.pitches[i] != want)
                self.pitches[i] = p
                groups.add(lay.note_group[i])
        old_ks = {}
        segs = set()
        for g in groups:
            for i in lay.groups[g]:
                old_ks[i] = self.ks[i]
            lay.spell_group(g, self.pitches, key, self.ks, cfg)
            segs.update(lay.group_segments[g])
        lo, hi = min(segs), max(segs)
        stop = min(self.next_nonempty[hi] + 1, lay.n_segments)
        old_seg = {j: (self.diam[j], self.ce[j]) for j in segs}
        old_seq = (self.mom[lo:stop], self.strain[lo:stop])
        sums = list(self.sums)
        t_diam, t_mom, t_strain = self.targets
        sq = self.square
        for j in segs:
            d, c = lay.segment_stats(j, self.ks, cfg)
            a, b = d - t_diam[j], self.diam[j] - t_diam[j]
            sums[0] += a * a - b * b if sq else abs(a) - abs(b)
            self.diam[j] = d
            self.ce[j] = c
        pj = self.prev_nonempty[lo]
        carried = self.ce[pj] if pj >= 0 else None
        prev_strain = self.strain[lo - 1] if lo > 0 else 0.0
        mom, strain = sequence_measures(self.ce, key.position, lo, stop, carried, prev_strain)
        old_mom, old_strain = self.mom, self.strain
        for off, j in enumerate(range(lo, stop)):
            a, b = mom[off] - t_mom[j], old_mom[j] - t_mom[j]
            c, e = strain[off] - t_strain[j], old_strain[j] - t_strain[j]
            if sq:
                sums[1] += a * a - b * b
                sums[2] += c * c - e * e
            else:
                sums[1] += abs(a) - abs(b)
                sums[2] += abs(c) - abs(e)
        self.mom[lo:stop] = mom
        self.strain[lo:stop] = strain
        self._undo = (old_x, old_pitch, old_ks, old_seg, lo, stop, old_seq,
                      self.sums, self.violations, self.objective)
        self.sums = sums
        self.violations = violations
        self.objective = self._combine(sums, violations)
        return self.objective

    def revert(self) -> None:
        (old_x, old_pitch, old_ks, old_seg, lo, stop, old_seq,
         sums, violations, obj) = self._undo
        for v, x in old_x:
            self.x[v] = x
        for i, p in old_pitch.items():
            self.pitches[i] = p
        for i, k in old_ks.items():
            self.ks[i] = k
        for j, (d, c) in old_seg.items():
            self.diam[j] = d
            self.ce[j] = c
        self.mom[lo:stop] = old_seq[0]
        self.strain[lo:stop] = old_seq[1]
        self.sums, self.violations, self.objective = sums, violations, obj
        self._undo = None

    def commit(self) -> None:
        self._undo = None
        self._resum()

    def profile(self) -> TensionProfile:
        return TensionProfile(self.problem.segment_beats, self.diam, self.mom, self.strain,
                              self.problem.key)


# -- random construction and perturbation ------------------------------------

def make_rng(seed=None) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return make_rng(seed_or_rng)


def random_feasible(problem: MorphProblem, seed=None) -> Assignment:
    """Uniform random pitch for every free variable.

    Each variable's range already excludes pitches that would push a linked
    note out of its track range, so drawing from it is the same as drawing
    from the track range and rejecting infeasible values.
    """
    rng = _rng(seed)
    return Assignment(tuple(int(rng.integers(lo, hi + 1)) for lo, hi in problem.var_range))


def _perturbation_changes(problem: MorphProblem, x: Sequence[int],
                          rng: np.random.Generator) -> list[tuple[int, int]]:
    count = min(problem.n_free, math.ceil(PERTURB_FRACTION * problem.n_free))
    chosen = sorted(int(v) for v in rng.choice(problem.n_free, size=count, replace=False))
    return [(v, int(rng.integers(problem.var_range[v][0], problem.var_range[v][1] + 1)))
            for v in chosen]


def perturb(problem: MorphProblem, assignment: Assignment, seed=None) -> Assignment:
    """Re-draw ``ceil(12% of UP)`` distinct free pitches uniformly in range."""
    rng = _rng(seed)
    x = list(assignment.free_pitches)
    for v, p in _perturbation_changes(problem, x, rng):
        x[v] = p
    return Assignment(tuple(x))


# -- neighborhoods ------------------------------------------------------------

def moves_change1(problem: MorphProblem, x: Sequence[int], cursor: int
                  ) -> Iterator[list[tuple[int, int]]]:
    """Every other in-range pitch for each free note of slice ``cursor``."""
    for v in problem.slice_vars[cursor]:
        lo, hi = problem.var_range[v]
        for p in range(lo, hi + 1):
            if p != x[v]:
                yield [(v, p)]


def moves_change_slice(problem: MorphProblem, x: Sequence[int], cursor: int,
                       rng: np.random.Generator) -> Iterator[list[tuple[int, int]]]:
    """All pitch pairs for two randomly drawn free notes of slice ``cursor``.

    With fewer than two free notes in the slice this is ``change1`` there.
    """
    free = problem.slice_vars[cursor]
    if len(free) < 2:
        yield from moves_change1(problem, x, cursor)
        return
    a, b = sorted(int(v) for v in rng.choice(free, size=2, replace=False))
    (alo, ahi), (blo, bhi) = problem.var_range[a], problem.var_range[b]
    for pa in range(alo, ahi + 1):
        for pb in range(blo, bhi + 1):
            if pa != x[a] or pb != x[b]:
                yield [(a, pa), (b, pb)]


def moves_swap(problem: MorphProblem, x: Sequence[int], cursor: int
               ) -> Iterator[list[tuple[int, int]]]:
    """Swap a free note of slice ``cursor`` with any later free note."""
    ranges = problem.var_range
    for v in problem.slice_vars[cursor]:
        for u in range(v + 1, problem.n_free):
            if x[u] == x[v]:
                continue
            if ranges[v][0] <= x[u] <= ranges[v][1] and ranges[u][0] <= x[v] <= ranges[u][1]:
                yield [(v, x[u]), (u, x[v])]


def _moves(kind: str, problem: MorphProblem, x, cursor: int, rng):
    if kind == CHANGE1:
        return moves_change1(problem, x, cursor)
    if kind == CHANGE_SLICE:
        return moves_change_slice(problem, x, cursor, rng)
    if kind == SWAP:
        return moves_swap(problem, x, cursor)
    raise ValueError(f"unknown neighborhood {kind!r}")


# -- search -------------------------------------------------------------------

TRACE_HEADER = ("move", "elapsed_ms", "objective", "best_objective", "neighborhood", "perturbation")


@dataclass
class SearchTrace:
    seed: object = None
    rows: list[tuple[int, float, float, float, str, bool]] = field(default_factory=list)
    evaluations: int = 0
    initial: Assignment | None = None
    local_optima: list[float] = field(default_factory=list)
    _t0: float = field(default_factory=time.perf_counter, repr=False)

    def record(self, objective: float, best: float, neighborhood: str,
               perturbation: bool = False) -> None:
        elapsed = (time.perf_counter() - self._t0) * 1000.0
        self.rows.append((len(self.rows), elapsed, objective, best, neighborhood, perturbation))

    @property
    def objectives(self) -> np.ndarray:
        return np.array([r[2] for r in self.rows])

    @property
    def best_objectives(self) -> np.ndarray:
        return np.array([r[3] for r in self.rows])

    @property
    def perturbations(self) -> np.ndarray:
        return np.array([r[5] for r in self.rows], dtype=bool)

    def to_csv(self, clock: bool = True) -> str:
        lines = [f"# seed={self.seed}", ",".join(TRACE_HEADER)]
        for move, ms, obj, best, hood, pert in self.rows:
            ms_text = f"{ms:.3f}" if clock else "0.000"
            lines.append(f"{move},{ms_text},{obj:.9f},{best:.9f},{hood},{int(pert)}")
        return "\n".join(lines) + "\n"


class _Search:
    def __init__(self, problem: MorphProblem, start: Assignment, rng: np.random.Generator,
                 trace: SearchTrace):
        self.problem = problem
        self.ev = Evaluator(problem, start)
        self.rng = rng
        self.trace = trace
        self.best = self.ev.assignment()
        self.best_obj = self.ev.objective
        # objective by assignment; the search keeps revisiting the same states
        self.memo: dict[tuple[int, ...], float] = {}

    def _note_best(self) -> None:
        if self.ev.objective < self.best_obj:
            self.best_obj = self.ev.objective
            self.best = self.ev.assignment()

    def local_search(self, kind: str) -> bool:
        ev, prob = self.ev, self.problem
        n = len(prob.time_slices)
        improved = False
        while True:
            improved_pass = False
            s = 0
            while s < n:
                accepted = False
                if prob.slice_vars[s]:
                    current = ev.objective
                    for changes in _moves(kind, prob, ev.x, s, self.rng):
                        self.trace.evaluations += 1
                        if self._try(changes, current):
                            accepted = True
                            break
                if accepted:
                    self._note_best()
                    self.trace.record(ev.objective, self.best_obj, kind)
                    improved_pass = True
                    s = max(0, s - BACKTRACK_SLICES)
                else:
                    s += 1
            if not improved_pass:
                return improved
            improved = True

    def _try(self, changes, current: float) -> bool:
        """Apply ``changes`` if they beat ``current``; report whether they did."""
        ev = self.ev
        x = ev.x
        saved = [(v, x[v]) for v, _ in changes]
        for v, p in changes:
            x[v] = p
        key = tuple(x)
        for v, p in saved:
            x[v] = p
        known = self.memo.get(key)
        if known is not None and not known < current - _EPS:
            return False
        value = ev.propose(changes)
        if len(self.memo) >= MEMO_LIMIT:
            self.memo.clear()
        self.memo[key] = value
        if value < current - _EPS:
            ev.commit()
            return True
        ev.revert()
        return False

    def descend(self) -> None:
        """Cycle through the neighborhoods until none improves."""
        k = 0
        while k < len(NEIGHBORHOODS):
            improved = self.local_search(NEIGHBORHOODS[k])
            if self.best_obj <= 0.0:
                return
            k = 0 if improved and k > 0 else k + 1

    def perturb(self) -> None:
        changes = _perturbation_changes(self.problem, self.ev.x, self.rng)
        self.ev.propose(changes)
        self.ev.commit()
        self._note_best()
        self.trace.record(self.ev.objective, self.best_obj, "perturbation", True)


def local_search(problem: MorphProblem, assignment: Assignment, neighborhood: str = CHANGE1,
                 seed=None) -> tuple[Assignment, bool]:
    """First-descent chronological sweep in one neighborhood.

    After an accepted move the sweep backs up four time slices. Returns the
    final assignment and whether the objective went down.
    """
    search = _Search(problem, assignment, _rng(seed), SearchTrace(seed))
    improved = search.local_search(neighborhood)
    return search.ev.assignment(), improved


def vns(problem: MorphProblem, max_iters: int = 10, seed=None,
        start: Assignment | None = None) -> tuple[Assignment, SearchTrace]:
    """Variable neighborhood search from a random feasible start.

    Each iteration descends through change1, changeSlice and swap (going
    back to change1 whenever a later neighborhood helps) and then perturbs
    12% of the free pitches. The last iteration skips the perturbation.
    Returns the best assignment seen and the search trace.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    rng = make_rng(seed)
    trace = SearchTrace(seed)
    if start is None:
        start = random_feasible(problem, rng)
    trace.initial = start
    search = _Search(problem, start, rng, trace)
    trace.record(search.ev.objective, search.best_obj, "initial")
    for it in range(max_iters):
        search.descend()
        trace.local_optima.append(search.ev.objective)
        if search.best_obj <= 0.0 or it + 1 == max_iters:
            break
        search.perturb()
    return search.best, trace
