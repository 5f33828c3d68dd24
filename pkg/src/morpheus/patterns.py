"""Geometric pattern discovery on (time, pitch) point sets.

``sia`` finds the maximal translatable pattern (MTP) for every inter-point
vector, ``siatec`` groups MTPs into translational equivalence classes (TECs),
and ``cosiatec`` / ``siatec_compress`` pick TECs that compress the set.
TECs serialize as ``T(P(p(t,p),...),V(v(dt,dp),...))``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

Point = tuple[int, int]
Vector = tuple[int, int]

ZERO: Vector = (0, 0)


def _add(p: Point, v: Vector) -> Point:
    return (p[0] + v[0], p[1] + v[1])


def _sub(a: Point, b: Point) -> Vector:
    return (a[0] - b[0], a[1] - b[1])


@dataclass(frozen=True)
class Tec:
    """A pattern and every vector that translates it into the point set.

    The pattern is stored as its earliest occurrence, so all translators are
    lexicographically >= (0, 0) and the identity comes first.
    """

    pattern: tuple[Point, ...]
    translators: tuple[Vector, ...] = (ZERO,)

    def __post_init__(self):
        pattern = tuple(sorted({tuple(map(int, p)) for p in self.pattern}))
        if not pattern:
            raise ValueError("a TEC pattern cannot be empty")
        vecs = {tuple(map(int, v)) for v in self.translators} | {ZERO}
        shift = min(vecs)
        object.__setattr__(self, "pattern", tuple(_add(p, shift) for p in pattern))
        object.__setattr__(self, "translators", tuple(sorted(_sub(v, shift) for v in vecs)))

    def __len__(self) -> int:
        return len(self.pattern)

    def occurrences(self) -> list[tuple[Point, ...]]:
        return [tuple(_add(p, v) for p in self.pattern) for v in self.translators]

    def coverage(self) -> frozenset[Point]:
        return frozenset(_add(p, v) for v in self.translators for p in self.pattern)

    @property
    def encoding_size(self) -> int:
        return len(self.pattern) + len(self.translators) - 1

    @property
    def compression_ratio(self) -> float:
        return len(self.coverage()) / self.encoding_size

    def encode(self) -> str:
        return encode_tec(self)


@dataclass(frozen=True)
class Cover:
    tecs: tuple[Tec, ...] = ()
    residual: frozenset = field(default_factory=frozenset)

    def covered(self) -> frozenset[Point]:
        out: set[Point] = set(self.residual)
        for t in self.tecs:
            out |= t.coverage()
        return frozenset(out)

    @property
    def compression_ratio(self) -> float:
        return compression_ratio(self)

    def __len__(self) -> int:
        return len(self.tecs)


def _points(ps) -> list[Point]:
    return sorted({(int(p[0]), int(p[1])) for p in ps})


def sia(ps: Iterable) -> dict[Vector, tuple[Point, ...]]:
    """Map each positive inter-point vector to its maximal translatable pattern."""
    pts = _points(ps)
    mtps: dict[Vector, list[Point]] = {}
    for i, p in enumerate(pts):
        for q in pts[i + 1:]:
            mtps.setdefault(_sub(q, p), []).append(p)
    return {v: tuple(mtps[v]) for v in sorted(mtps)}


def translators(pattern: Sequence[Point], ps: set[Point] | Iterable) -> list[Vector]:
    pset = ps if isinstance(ps, (set, frozenset)) else set(_points(ps))
    anchor = pattern[0]
    rest = pattern[1:]
    out = []
    for q in sorted(pset):
        v = _sub(q, anchor)
        if all(_add(p, v) in pset for p in rest):
            out.append(v)
    return out


def siatec(ps: Iterable) -> list[Tec]:
    """One TEC per distinct MTP shape, in order of first discovery by vector."""
    pts = _points(ps)
    if len(pts) == 1:
        return [Tec((pts[0],), (ZERO,))]
    pset = set(pts)
    seen: set[tuple[Vector, ...]] = set()
    out = []
    for pattern in sia(pts).values():
        shape = tuple(_sub(p, pattern[0]) for p in pattern)
        if shape in seen:
            continue
        seen.add(shape)
        out.append(Tec(pattern, translators(pattern, pset)))
    return out


def _bbox_area(pattern: Sequence[Point]) -> int:
    ts = [p[0] for p in pattern]
    hs = [p[1] for p in pattern]
    return (max(ts) - min(ts)) * (max(hs) - min(hs))


def _rank(tec: Tec, uncovered: set[Point]) -> tuple:
    gain = len(tec.coverage() & uncovered)
    return (-gain / tec.encoding_size, -gain, _bbox_area(tec.pattern), tec.pattern)


def _compresses(tec: Tec, uncovered: set[Point]) -> bool:
    # strictly more new points than it costs to encode
    return len(tec.coverage() & uncovered) > tec.encoding_size


def _admissible(tec: Tec, min_len: int, max_len: int | None) -> bool:
    if len(tec.translators) < 2:
        return False
    return len(tec) >= min_len and (max_len is None or len(tec) <= max_len)


def _check_lengths(min_len: int, max_len: int | None) -> None:
    if min_len < 1:
        raise ValueError(f"min_len must be >= 1, got {min_len}")
    if max_len is not None and max_len < min_len:
        raise ValueError(f"max_len {max_len} < min_len {min_len}")


def cosiatec(ps: Iterable, min_len: int = 1, max_len: int | None = None) -> Cover:
    """Greedy compression into disjoint TECs.

    Each round runs SIATEC on the points still uncovered and keeps the TEC
    with the best compression ratio, as long as it actually compresses.
    Points no admissible TEC can take end up as single-point TECs, so the
    result partitions the input.
    """
    _check_lengths(min_len, max_len)
    remaining = set(_points(ps))
    chosen: list[Tec] = []
    while remaining:
        cands = [t for t in siatec(remaining) if _admissible(t, min_len, max_len)]
        if not cands:
            break
        best = min(cands, key=lambda t: _rank(t, remaining))
        if not _compresses(best, remaining):
            break
        chosen.append(best)
        remaining -= best.coverage()
    chosen.extend(Tec((p,)) for p in sorted(remaining))
    return Cover(tuple(chosen))


def siatec_compress(ps: Iterable, min_len: int = 1, max_len: int | None = None) -> Cover:
    """Greedy set cover from a single SIATEC run; TECs may overlap.

    A TEC is taken only while it covers more new points than its encoding
    size, which keeps the overall compression ratio at or above 1.
    """
    _check_lengths(min_len, max_len)
    pts = _points(ps)
    uncovered = set(pts)
    cands = [t for t in siatec(pts) if _admissible(t, min_len, max_len)]
    chosen: list[Tec] = []
    while uncovered and cands:
        best = min(cands, key=lambda t: _rank(t, uncovered))
        if not _compresses(best, uncovered):
            break
        chosen.append(best)
        uncovered -= best.coverage()
        cands.remove(best)
    chosen.extend(Tec((p,)) for p in sorted(uncovered))
    return Cover(tuple(chosen))


def compression_ratio(obj: Cover | Tec) -> float:
    """Covered points over encoding size; 1.0 for an empty cover."""
    if isinstance(obj, Tec):
        return obj.compression_ratio
    size = sum(t.encoding_size for t in obj.tecs) + len(obj.residual)
    if size == 0:
        return 1.0
    return len(obj.covered()) / size


# -- text encoding ------------------------------------------------------------

class TecParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at character {offset}")
        self.offset = offset


def encode_tec(tec: Tec) -> str:
    pts = ",".join(f"p({t},{p})" for t, p in tec.pattern)
    vecs = ",".join(f"v({t},{p})" for t, p in tec.translators)
    return f"T(P({pts}),V({vecs}))"


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, token: str) -> None:
        self.skip()
        if not self.text.startswith(token, self.pos):
            raise TecParseError(f"expected {token!r}", self.pos)
        self.pos += len(token)

    def peek(self, token: str) -> bool:
        self.skip()
        return self.text.startswith(token, self.pos)

    def integer(self) -> int:
        self.skip()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] in "+-":
            self.pos += 1
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        digits = self.text[start:self.pos]
        if not digits.lstrip("+-"):
            raise TecParseError("expected integer", start)
        return int(digits)

    def pair(self, tag: str) -> tuple[int, int]:
        self.expect(tag + "(")
        a = self.integer()
        self.expect(",")
        b = self.integer()
        self.expect(")")
        return (a, b)

    def pairs(self, tag: str) -> list[tuple[int, int]]:
        items = [self.pair(tag)]
        while self.peek(","):
            self.expect(",")
            items.append(self.pair(tag))
        return items


def decode_tec(text: str) -> Tec:
    r = _Reader(text)
    r.expect("T(")
    r.expect("P(")
    pattern = r.pairs("p")
    r.expect(")")
    r.expect(",")
    r.expect("V(")
    vec_start = r.pos
    vectors = r.pairs("v")
    r.expect(")")
    r.expect(")")
    r.skip()
    if r.pos != len(text):
        raise TecParseError("trailing characters", r.pos)
    if ZERO not in vectors:
        raise TecParseError("translator list lacks v(0,0)", vec_start)
    return Tec(tuple(pattern), tuple(vectors))


def canonical_tec_text(text: str) -> str:
    return encode_tec(decode_tec(text))
