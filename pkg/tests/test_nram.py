import itertools

import pytest
from hypothesis import given, strategies as st

from ntisp.errors import ParseError, ValidationError
from ntisp.nram import (ACCEPT, BUDGET_EXCEEDED, CERTIFICATE_EXHAUSTED, REJECT, Budget,
                        NramRuntimeError, assemble, disassemble, load_certificate, make_program,
                        run, search_certificate)
from ntisp.structures import unary_structure

from programs import SIG, suite

BIG = Budget(1000, 1000, 1000)


def test_assemble_minimal_program():
    p = assemble("1: A:=L / 2: ACCEPT")
    assert [i.op for i in p.instructions] == ["SETL", "ACCEPT"]


def test_accept_must_be_last():
    with pytest.raises(ParseError, match="accept must be the last instruction"):
        assemble("1: ZERO\n2: INC\n3: ACCEPT\n4: INC\n5: REJECT")


def test_goto_target_range():
    with pytest.raises(ParseError, match="goto target 9 out of range"):
        assemble("1: IFEQ 1 9 2\n2: ZERO\n3: ZERO\n4: REJECT\n5: ACCEPT")


def test_unknown_mnemonic_has_line():
    with pytest.raises(ParseError) as exc:
        assemble("1: ZERO\n2: JUMP 3\n3: ACCEPT")
    assert exc.value.line == 2


def test_disassemble_roundtrip():
    for p in suite().values():
        assert assemble(disassemble(p)) == p


def test_run_setl_accept():
    r = run(assemble("1: SETL\n2: ACCEPT"), unary_structure([0] * 5), [], BIG)
    assert r.verdict == ACCEPT
    assert r.meter.steps == 2 and r.meter.max_content == 5


def test_guess_matches_register():
    p = assemble(SIG + "1: GUESS\n2: IFEQ 1 4 3\n3: REJECT\n4: ACCEPT")
    assert run(p, unary_structure([1, 1]), [0], BIG).verdict == ACCEPT
    assert run(p, unary_structure([1, 1]), [1], BIG).verdict == REJECT


def test_decrement_stops_at_zero():
    r = run(make_program([("ZERO",), ("DEC",), ("ACCEPT",)]), unary_structure([0]), [], BIG, trace=True)
    assert r.verdict == ACCEPT
    assert r.trace[2].A == 0


def test_input_read_outside_domain_is_an_error():
    p = assemble(SIG + "1: SETL\n2: SETB 1\n3: READ f\n4: ACCEPT")
    with pytest.raises(NramRuntimeError):
        run(p, unary_structure([0, 0]), [], BIG)


def test_untouched_memory_reads_zero():
    p = assemble("1: SETL\n2: LOAD\n3: ACCEPT")
    r = run(p, unary_structure([0] * 4), [], BIG, trace=True)
    assert r.trace[-1].A == 0 and r.meter.max_address == 4


def test_budget_and_exhausted_certificate():
    loop = assemble("1: IFEQ 1 1 1\n2: ACCEPT")
    assert run(loop, unary_structure([0]), [], Budget(10, 5, 5)).verdict == BUDGET_EXCEEDED
    guess = assemble("1: GUESS\n2: ACCEPT")
    assert run(guess, unary_structure([0]), [], BIG).verdict == CERTIFICATE_EXHAUSTED
    big = assemble("1: SETL\n2: INC\n3: ACCEPT")
    assert run(big, unary_structure([0] * 3), [], Budget(10, 5, 3)).verdict == BUDGET_EXCEEDED


def test_search_finds_f0():
    p = assemble(SIG + "1: GUESS\n2: SETB 1\n3: ZERO\n4: SETB 1\n5: READ f\n6: ACCEPT")
    guess_f0 = assemble(SIG + ".d 2\n1: GUESS\n2: SETB 2\n3: ZERO\n4: SETB 1\n5: READ f\n"
                        "6: IFEQ 2 8 7\n7: REJECT\n8: ACCEPT")
    s = unary_structure([2, 0, 1])
    # oracle: every one-value certificate below the bound
    accepting = [v for v in range(4) if run(guess_f0, s, [v], BIG).accepted]
    assert accepting == [2]
    assert search_certificate(guess_f0, s, BIG, 4) == [2]
    assert search_certificate(guess_f0, s, BIG, 2) is None
    assert search_certificate(p, s, BIG, 1) == [0]


def test_search_without_guess():
    s = unary_structure([0, 0])
    assert search_certificate(suite()["accept"], s, BIG, 3) == []
    assert search_certificate(suite()["reject"], s, BIG, 3) is None


def test_guess_bound_must_be_positive():
    with pytest.raises(ValidationError):
        search_certificate(suite()["accept"], unary_structure([0]), BIG, 0)


def test_budget_parse_and_certificate_file():
    assert Budget.parse("steps=9,addr=3,content=4") == Budget(9, 3, 4)
    assert load_certificate("1\n# comment\n\n2\n") == [1, 2]
    with pytest.raises(ParseError):
        load_certificate("x")


PROGRAMS = suite()


@given(st.sampled_from(sorted(PROGRAMS)), st.integers(1, 3).flatmap(
    lambda n: st.lists(st.integers(0, n - 1), min_size=n, max_size=n)),
    st.lists(st.integers(0, 5), max_size=6))
def test_property_run_is_deterministic(name, values, cert):
    p, s = PROGRAMS[name], unary_structure(values)
    try:
        a = run(p, s, cert, Budget(60, 8, 8), trace=True)
    except NramRuntimeError:
        return
    b = run(p, s, cert, Budget(60, 8, 8), trace=True)
    assert (a.verdict, a.meter, a.trace) == (b.verdict, b.meter, b.trace)
    # meter soundness: the largest touched address is visible in the trace
    touched = [e.A for e, nxt in zip(a.trace, a.trace[1:]) if p[e.pc].op in ("LOAD", "STORE")]
    assert a.meter.max_address == (max(touched) if touched else None) or a.verdict == BUDGET_EXCEEDED
    if a.verdict == ACCEPT:
        assert a.trace[-1].pc == len(p)
    if a.verdict == REJECT:
        assert p[a.trace[-1].pc].op == "REJECT"


@given(st.sampled_from(sorted(PROGRAMS)), st.integers(2, 3).flatmap(
    lambda n: st.lists(st.integers(0, n - 1), min_size=n, max_size=n)))
def test_property_search_is_complete_under_bound(name, values):
    """A certificate exists below the bound iff search returns one."""
    p, s = PROGRAMS[name], unary_structure(values)
    budget, bound = Budget(40, 6, 6), 4
    found = search_certificate(p, s, budget, bound)
    guesses = sum(1 for i in p.instructions if i.op == "GUESS")
    exists = False
    for k in range(0, 9):
        for cert in itertools.product(range(bound), repeat=k):
            try:
                if run(p, s, list(cert), budget).accepted:
                    exists = True
                    break
            except NramRuntimeError:
                pass
        if exists or (guesses == 0 and k == 0):
            break
    assert (found is not None) == exists
    if found is not None:
        assert run(p, s, found, budget).accepted
