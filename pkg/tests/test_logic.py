import itertools

import pytest
from hypothesis import given, strategies as st

from ntisp import logic
from ntisp.errors import ParseError
from ntisp.logic import App, Eq, Interpretation, Num, Var, evaluate, parse_formula, succ_delta


def test_worked_length_example():
    assert logic.length(parse_formula("g(h(1,0),2)=h(3,1)")) == 9


def test_length_counts_connectives():
    # 6 integers, 3 equalities, one each of ~ & |
    assert logic.length(parse_formula("~(1=2) & (0=0 | 1=1)")) == 12


def test_parse_print_roundtrip():
    text = "~(f(x1)=succ(0)) & (g(x1,y1)=x1 | h(y1)=0)"
    f = parse_formula(text)
    assert parse_formula(str(f)) == f


def test_parse_error_on_garbage():
    with pytest.raises(ParseError):
        parse_formula("f(x1")


@pytest.mark.parametrize("n,delta", [(2, 1), (3, 1), (3, 2), (2, 3), (4, 2)])
def test_succ_delta_is_a_total_order(n, delta):
    order = list(itertools.product(range(n), repeat=delta))
    cur = order[0]
    seen = [cur]
    while True:
        nxt = succ_delta(cur, n)
        if nxt == cur:
            break
        seen.append(nxt)
        cur = nxt
    assert seen == order  # lexicographic with the first coordinate most significant


def test_succ_delta_examples():
    assert succ_delta((1, 2), 3) == (2, 0)
    assert succ_delta((2, 2), 3) == (2, 2)
    assert succ_delta((2,), 4) == (3,) and succ_delta((3,), 4) == (3,)


def test_evaluate_with_succ_saturating():
    interp = Interpretation(3, {"f": (1, (1, 2, 0))})
    f = parse_formula("f(x1)=succ(x1) | x1=succ(x1)")
    assert [evaluate(f, interp, {"x1": a}) for a in range(3)] == [True, True, True]


terms = st.recursive(
    st.integers(0, 2).map(Num) | st.sampled_from([Var("x1"), Var("y1")]),
    lambda inner: st.tuples(st.sampled_from(["f", "g"]), inner, inner).map(
        lambda t: App(t[0], (t[1],)) if t[0] == "f" else App(t[0], (t[1], t[2]))),
    max_leaves=6)
formulas = st.recursive(
    st.tuples(terms, terms).map(lambda p: Eq(*p)),
    lambda inner: inner.map(logic.neg) | st.lists(inner, min_size=2, max_size=3).map(
        lambda xs: logic.conj(*xs)) | st.lists(inner, min_size=2, max_size=3).map(
        lambda xs: logic.disj(*xs)),
    max_leaves=5)


@given(formulas, st.integers(0, 2), st.integers(0, 2),
       st.lists(st.integers(0, 2), min_size=12, max_size=12))
def test_property_nnf_and_compiled_agree_with_evaluate(f, x, y, vals):
    f_tab = {(a,): vals[a] for a in range(3)}
    g_tab = {(a, b): vals[3 + 3 * a + b] for a in range(3) for b in range(3)}
    tables = {"f": tuple(f_tab[(a,)] for a in range(3)),
              "g": tuple(g_tab[(a, b)] for a in range(3) for b in range(3))}
    interp = Interpretation(3, {"f": (1, tables["f"]), "g": (2, tables["g"])})
    env = {"x1": x, "y1": y}
    want = evaluate(f, interp, env)
    assert evaluate(logic.nnf(f), interp, env) == want
    fn = logic.compile_formula(f, 3, ["x1", "y1"])
    assert bool(fn(tables)(x, y)) == want
    assert parse_formula(str(f)) == f
