import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _fixtures import brute_sia, brute_translators, motif_piece, random_points
from morpheus.patterns import (Cover, Tec, TecParseError, canonical_tec_text, compression_ratio,
                               cosiatec, decode_tec, encode_tec, sia, siatec, siatec_compress)
from morpheus.score import to_pointset

EXAMPLE_TEC = ("T(P(p(360,72),p(480,71),p(600,75),p(720,76),p(840,70)),"
           "V(v(0,0),v(480,-2),v(1920,-24),v(2400,-26)))")

points_st = st.lists(st.tuples(st.integers(0, 12), st.integers(55, 70)), max_size=14)


def _occurrence_sets(tecs):
    return {frozenset(frozenset(o) for o in t.occurrences()) for t in tecs}


def test_sia_small_example():
    ps = [(0, 0), (1, 0), (10, 0), (11, 0)]
    mtps = sia(ps)
    assert mtps[(1, 0)] == ((0, 0), (10, 0))
    assert mtps[(10, 0)] == ((0, 0), (1, 0))
    assert mtps[(11, 0)] == ((0, 0),)
    assert all(v > (0, 0) for v in mtps)


def test_siatec_small_example():
    tecs = siatec([(0, 0), (1, 0), (10, 0), (11, 0)])
    pair = next(t for t in tecs if t.pattern == ((0, 0), (1, 0)))
    assert pair.translators == ((0, 0), (10, 0))


@settings(max_examples=100, deadline=None)
@given(points_st)
def test_sia_matches_brute_force(ps):
    assert {v: list(p) for v, p in sia(ps).items()} == brute_sia(ps)


@settings(max_examples=100, deadline=None)
@given(points_st)
def test_siatec_matches_brute_force(ps):
    pts = sorted(set(ps))
    expected = []
    seen = set()
    for mtp in brute_sia(pts).values():
        shape = tuple((t - mtp[0][0], p - mtp[0][1]) for t, p in mtp)
        if shape not in seen:
            seen.add(shape)
            expected.append(Tec(tuple(mtp), tuple(brute_translators(mtp, pts))))
    got = siatec(pts)
    if len(pts) == 1:
        assert got == [Tec((pts[0],))]
    else:
        assert _occurrence_sets(got) == _occurrence_sets(expected)
        assert len(got) == len(expected)
    for t in got:
        assert t.translators[0] == (0, 0)
        assert all(v >= (0, 0) for v in t.translators)


def test_siatec_empty():
    assert siatec([]) == []


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 20), st.integers(55, 75)), max_size=40),
       st.integers(1, 4))
def test_cover_properties(ps, min_len):
    pts = set(ps)
    cov = cosiatec(pts, min_len)
    seen = []
    for t in cov.tecs:
        seen.extend(t.coverage())
    assert sorted(seen) == sorted(pts)
    assert cov.compression_ratio >= 1.0
    comp = siatec_compress(pts, min_len)
    assert comp.covered() == frozenset(pts)
    assert comp.compression_ratio >= 1.0
    for t in cov.tecs + comp.tecs:
        assert decode_tec(encode_tec(t)) == t
        assert len(t) == 1 or len(t) >= min_len


def test_max_len_respected():
    pts = random_points(np.random.default_rng(2), 30)
    for t in cosiatec(pts, 1, 3).tecs:
        assert len(t) <= 3


def test_length_validation():
    with pytest.raises(ValueError):
        cosiatec([(0, 0)], 0)
    with pytest.raises(ValueError):
        siatec_compress([(0, 0)], 4, 2)


def test_compression_ratio_examples():
    tec = Tec(((0, 60), (1, 62)), ((0, 0), (4, 0), (8, 5)))
    assert tec.encoding_size == 4
    assert compression_ratio(tec) == pytest.approx(6 / 4)
    assert compression_ratio(Cover()) == 1.0
    singles = Cover((Tec(((0, 1),)), Tec(((1, 1),))))
    assert compression_ratio(singles) == 1.0


def test_motif_fixture_compresses():
    piece = motif_piece()
    cov = cosiatec(to_pointset(piece).points, 5)
    assert cov.compression_ratio > 1.3
    assert any(len(t) >= 5 and len(t.translators) == 4 for t in cov.tecs)


def test_example_tec_round_trips():
    assert encode_tec(decode_tec(EXAMPLE_TEC)) == EXAMPLE_TEC
    tec = decode_tec(EXAMPLE_TEC)
    assert len(tec.occurrences()) == 4
    assert tec.encoding_size == 8


def test_decode_normalizes_whitespace_and_order():
    text = "T( P(p(1,2), p(0,1)), V(v(3,0), v(0,0)) )"
    assert canonical_tec_text(text) == "T(P(p(0,1),p(1,2)),V(v(0,0),v(3,0)))"


@pytest.mark.parametrize("text, offset", [
    ("X(P(p(0,0)),V(v(0,0)))", 0),
    ("T(P(p(0,0)),V(v(1,0)))", 14),
    ("T(P(p(0,x)),V(v(0,0)))", 8),
    ("T(P(p(0,0)),V(v(0,0))) junk", 23),
])
def test_decode_errors_report_offset(text, offset):
    with pytest.raises(TecParseError) as exc:
        decode_tec(text)
    assert exc.value.offset == offset


def test_tec_rejects_empty_pattern():
    with pytest.raises(ValueError):
        Tec(())
