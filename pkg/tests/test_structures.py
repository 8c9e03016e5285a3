import itertools

import pytest
from hypothesis import given, strategies as st

from ntisp.errors import ParseError, ValidationError
from ntisp.structures import (FUNC, REL, DaryCode, Signature, Structure, ceil_root,
                              decode_dary, encode_unary_to_dary, from_digits, load_structure,
                              serialize, to_digits, unary_structure)


def test_load_unary_table():
    s = load_structure("structure n=3\nfunc f/1\n1 2 0\nend\n")
    assert [s("f", a) for a in range(3)] == [1, 2, 0]


def test_load_xor_table():
    s = load_structure("structure n=2\nfunc g/2\n0 1 1 0\nend\n")
    assert {(a, b): s("g", a, b) for a in range(2) for b in range(2)} == {
        (0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 0}


def test_load_rejects_value_outside_domain():
    with pytest.raises(ParseError, match="value out of domain"):
        load_structure("structure n=3\nfunc f/1\n1 5 0\nend\n")


def test_load_reports_line_of_bad_length():
    with pytest.raises(ParseError) as exc:
        load_structure("structure n=2\nfunc f/1\n1\nend\n")
    assert exc.value.line == 4


def test_relation_entries_must_be_boolean():
    with pytest.raises(ValidationError):
        Structure(2, Signature.of(("E", REL, 2)), {"E": (0, 2, 0, 0)})


def test_constants_have_one_entry():
    s = Structure(3, Signature.of(("c", FUNC, 0)), {"c": (2,)})
    assert s("c") == 2


def test_duplicate_symbol_names_rejected():
    with pytest.raises(ValidationError):
        Signature.of(("f", FUNC, 1), ("f", REL, 1))


def test_ceil_root_is_exact_at_boundaries():
    for d in (1, 2, 3):
        for k in range(1, 12):
            assert ceil_root(k ** d, d) == k
            assert ceil_root(k ** d + 1, d) == k + 1


def test_digits_roundtrip():
    assert to_digits(7, 3, 2) == (1, 2)
    assert from_digits((1, 2), 3) == 7


def test_code_example_m9_d2():
    f = [0] * 9
    f[7] = 5
    code = encode_unary_to_dary(unary_structure(f), 2)
    assert code.n == 4
    # 7 and 5 in base 3, least significant digit first: (1,2) and (2,1)
    g0, g1 = code.inner.tables["g0"], code.inner.tables["g1"]
    assert code.inner("g0", 1, 2) == 2 and code.inner("g1", 1, 2) == 1
    assert code.inner("g0", 3, 0) == 3 and code.inner("g1", 3, 0) == 3
    assert len(g0) == len(g1) == 16


def test_code_example_m2_d1():
    code = encode_unary_to_dary(unary_structure([1, 0]), 1)
    assert code.n == 3
    assert code.inner.tables["g0"] == (1, 0, 2)


def _digit_oracle(s, d):
    """Independent construction of the code straight from the clauses."""
    m = s.n
    k = 1
    while k ** d < m:
        k += 1
    n = k + 1
    tabs = [[] for _ in range(d)]
    for args in itertools.product(range(n), repeat=d):
        a = sum(x * (n - 1) ** i for i, x in enumerate(args))
        if any(x == n - 1 for x in args) or a >= m:
            for t in tabs:
                t.append(n - 1)
        else:
            v = s("f", a)
            for i, t in enumerate(tabs):
                t.append((v // (n - 1) ** i) % (n - 1))
    return n, [tuple(t) for t in tabs]


@pytest.mark.parametrize("m", range(2, 11))
@pytest.mark.parametrize("d", [1, 2, 3])
def test_code_matches_clause_oracle(m, d):
    s = unary_structure([(3 * a + 1) % m for a in range(m)])
    code = encode_unary_to_dary(s, d)
    n, tabs = _digit_oracle(s, d)
    assert code.n == n
    assert [code.inner.tables[f"g{i}"] for i in range(d)] == tabs
    assert (n - 2) ** d < m <= (n - 1) ** d


def test_decode_all_filler_is_empty():
    n, d = 3, 2
    sig = Signature(tuple(sym for sym in encode_unary_to_dary(unary_structure([0, 1]), d).inner.signature))
    inner = Structure(n, sig, {f"g{i}": (n - 1,) * n ** d for i in range(d)})
    m, f = decode_dary(DaryCode(d, inner))
    assert m == 0 and f == ()


def test_decode_rejects_tampered_filler():
    code = encode_unary_to_dary(unary_structure([1, 0, 1]), 2)
    tabs = dict(code.inner.tables)
    g0 = list(tabs["g0"])
    g0[-1] = 0  # (n-1, n-1) is a filler tuple
    tabs["g0"] = tuple(g0)
    bad = Structure(code.n, code.inner.signature, tabs)
    with pytest.raises(ValidationError, match="not a valid code"):
        decode_dary(DaryCode(2, bad))


def test_encode_needs_m_at_least_2():
    with pytest.raises(ValidationError):
        encode_unary_to_dary(unary_structure([0]), 2)


@given(st.integers(2, 6).flatmap(lambda m: st.lists(st.integers(0, m - 1), min_size=m, max_size=m)),
       st.sampled_from([1, 2, 3]))
def test_property_decode_inverts_encode(values, d):
    s = unary_structure(values)
    code = encode_unary_to_dary(s, d)
    m, f = decode_dary(code)
    assert (m, tuple(f)) == (len(values), tuple(values))
    # size stays linear: d * n^d <= d * (m^(1/d) + 2)^d
    assert code.n ** d <= (len(values) ** (1 / d) + 2) ** d + 1e-9


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(
    st.just(n), st.lists(st.integers(0, n - 1), min_size=n * n, max_size=n * n),
    st.lists(st.integers(0, 1), min_size=n, max_size=n))))
def test_property_serialize_roundtrip(args):
    n, g, r = args
    s = Structure(n, Signature.of(("g", FUNC, 2), ("P", REL, 1)), {"g": g, "P": r})
    assert load_structure(serialize(s)) == s
