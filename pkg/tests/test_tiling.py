import numpy as np
import pytest
from hypothesis import given, strategies as st

from ntisp.errors import ParseError, ValidationError
from ntisp.sublinear import tiling as tl


def universal(dims):
    d = len(dims)
    cells = np.ndindex(*dims)
    return tl.GridTiling(d, tuple(dims), {tuple(int(i) for i in x): ((0,) * (2 * d),) for x in cells})


def test_universal_2x2():
    t = universal((2, 2))
    res = tl.stream_tiling(t, "search")
    assert res.verdict == tl.SAT
    assert tl.stream_tiling(t, "verify", res.certificate).peak_live == 4


def test_constructed_mismatch():
    # axis 1 joins (0,0) face 3 to (0,1) face 2
    t = tl.GridTiling(2, (1, 2), {(0, 0): ((0, 0, 0, 1),), (0, 1): ((0, 0, 0, 0),)})
    assert tl.stream_tiling(t, "search").verdict == tl.UNSAT
    assert tl.brute_force_tiling(t) is None
    assert tl.stream_tiling(t, "verify", [0, 0]).verdict == tl.UNSAT


def test_invariants():
    with pytest.raises(ValidationError):
        tl.GridTiling(2, (1, 2), {(0, 0): ((0, 0, 0, 0),), (0, 1): ()})
    with pytest.raises(ValidationError):
        tl.GridTiling(2, (1,), {})
    with pytest.raises(ValidationError):
        tl.GridTiling(2, (1, 1), {(0, 0): ((0, 0),)})
    with pytest.raises(ValidationError):
        tl.stream_tiling(universal((2, 2)), "verify", [0, 0, 0, 5])


def test_streams_along_longest_axis():
    t = universal((2, 5))
    assert t.axis == 1
    assert [len(s) for s in t.slices()] == [2] * 5
    assert tl.stream_tiling(t, "verify", [0] * 10).peak_live == 4


def test_three_dimensions():
    t = universal((2, 2, 3))
    res = tl.stream_tiling(t, "verify", [0] * 12)
    assert res.verdict == tl.SAT and res.peak_live == 8


def test_format_round_trip():
    t = tl.random_tiling(np.random.default_rng(2), (3, 2))
    assert tl.load_tiling(tl.dump_tiling(t)) == t
    with pytest.raises(ParseError):
        tl.load_tiling("cell 0,0: tile 0 0 0 0\n")
    with pytest.raises(ParseError):
        tl.load_tiling("tiling d=2 dims=1,1\ncell 0,0: tile 0 0\n")


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([(2, 2), (2, 3), (3, 2), (3, 3), (1, 3)]))
def test_search_agrees_with_brute_force(seed, dims):
    t = tl.random_tiling(np.random.default_rng(seed), dims, max_tiles=3, colors=2)
    res = tl.stream_tiling(t, "search")
    assert (res.verdict == tl.SAT) == (tl.brute_force_tiling(t) is not None)
    if res.verdict == tl.SAT:
        again = tl.stream_tiling(t, "verify", res.certificate)
        assert again.verdict == tl.SAT
        width = len(t.slices()[0])
        assert again.peak_live == (2 * width if len(t.slices()) > 1 else width)
