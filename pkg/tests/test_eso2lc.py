import statistics

import pytest

from ntisp import eso2lc, lc, logic, nram2eso
from ntisp.eso import brute_force_check, holds_with, parse_eso
from ntisp.errors import ValidationError
from ntisp.nram import assemble, search_certificate
from ntisp.structures import unary_structure

import eso_corpus

SHIFT = parse_eso("exists f/2 forall x1 forall y1 : f(x1,y1)=f(x1,succ(y1))")


def test_unfold_example():
    u = eso2lc.unfold(SHIFT, 2, range_guards=False)
    assert [str(b) for b in u.blocks] == ["f__0(0)=f__1(0) & f__0(1)=f__1(1)",
                                          "f__1(0)=f__1(0) & f__1(1)=f__1(1)"]


def test_unfold_example_preserves_satisfiability():
    s = eso_corpus.structure([0, 1], [], 2)
    u = eso2lc.unfold(SHIFT, 2)
    want = brute_force_check(s, SHIFT).holds
    assert want
    assert (lc.solve_brute(eso2lc.unpadded_instance(eso2lc.unfold(SHIFT, 2, range_guards=False), s)).verdict
            == lc.SAT)
    assert lc.solve_stream(eso2lc.pad_to_lc(u, s), search=True).verdict == lc.SAT


@pytest.mark.parametrize("text", eso_corpus.FORMULAS[:12])
@pytest.mark.parametrize("n", [2, 3])
def test_uniform_length_and_layering(text, n):
    phi = parse_eso(text)
    u = eso2lc.unfold(phi, n)
    lengths = {logic.length(b) for b in u.blocks}
    assert lengths == {u.k * n - 1}
    for s in eso_corpus.structures(n)[:1]:
        inst = eso2lc.pad_to_lc(u, s)
        assert lc.validate_instance(inst) == []
        assert max(lc.length(f) for f in inst.layers) <= inst.n == u.N


def test_block_signatures():
    u = eso2lc.unfold(SHIFT, 3)
    for b, block in enumerate(u.blocks):
        names = {k for k in logic.symbols_used(block) if k.startswith("f__")}
        assert names <= {f"f__{b}", f"f__{min(b + 1, 2)}"}


def test_pad_example():
    phi = parse_eso(eso_corpus.FORMULAS[0])
    s = eso_corpus.structure([1, 0], [(0, 1)], 2)
    u = eso2lc.unfold(phi, 2)
    inst = eso2lc.pad_to_lc(u, s)
    N = u.k * 2
    assert inst.n == N
    for name, tab in inst.op.items():
        assert len(tab) == N * N
        for a0 in range(N):
            for a1 in range(N):
                if a0 >= 2 or a1 >= 2:
                    assert tab[a0 * N + a1] == 0
    # every layer meets the bound N^s = N exactly at k*n - 1 < N
    assert all(lc.length(f) < N for f in inst.layers)


def test_succ_is_not_cyclic():
    u = eso2lc.unfold(SHIFT, 3, range_guards=False)
    assert "f__3" not in str(u.blocks[-1])


def test_unfold_rejects_wrong_shape():
    with pytest.raises(ValidationError):
        eso2lc.unfold(parse_eso("exists g/3 forall x1 forall y1 : g(x1,y1,y1)=x1"), 2)


def _interp_check(inst, assignment):
    return all(lc.eval_nformula(inst, f, lambda k: assignment.get(k, 0)) for f in inst.layers)


@pytest.mark.parametrize("text", eso_corpus.FORMULAS)
def test_witness_transport_both_ways(text):
    phi = parse_eso(text)
    n = 2
    u = eso2lc.unfold(phi, n)
    for s in eso_corpus.structures(n):
        res = brute_force_check(s, phi)
        inst = eso2lc.pad_to_lc(u, s)
        if res.holds:
            tabs = {e.name: res.witness.tables[e.name] for e in phi.existentials}
            assert _interp_check(inst, eso2lc.witness_to_assignment(u, tabs))
        found = lc.solve_stream(inst, search=True)
        assert (found.verdict == lc.SAT) == res.holds
        if found.verdict == lc.SAT:
            assert holds_with(s, phi, eso2lc.assignment_to_witness(u, found.assignment))


def test_assignment_outside_domain_rejected():
    u = eso2lc.unfold(SHIFT, 2)
    with pytest.raises(ValidationError):
        eso2lc.assignment_to_witness(u, {("f__0", (0,)): 5})


# f(0) = 0 on the code structure: both digits of the first element are 0,
# a non-zero digit loops at the test and never accepts
F0_ZERO = assemble(".sig func g0/2\n.sig func g1/2\n"
                   "1: READ g0\n2: IFEQ 1 3 2\n3: READ g1\n4: IFEQ 1 5 4\n5: ACCEPT")


def _decide(red):
    u = eso2lc.unfold(red.folded.formula, red.code.n, range_guards=False)
    return lc.solve_sat(eso2lc.unpadded_instance(u, red.stages["sigma"])).verdict


def test_reduce_problem_sat_case():
    red = eso2lc.reduce_problem(unary_structure([0, 1, 2, 3]), F0_ZERO, 2)
    assert lc.validate_instance(red.instance) == []
    cert = search_certificate(F0_ZERO, red.code.inner, nram2eso.theorem_budget(red.code.n, 2), 6)
    assert cert == []
    assert _interp_check(red.instance, eso2lc.transport_run(red, F0_ZERO, cert))
    assert _decide(red) == lc.SAT


def test_reduce_problem_unsat_case():
    red = eso2lc.reduce_problem(unary_structure([1, 1, 2, 3]), F0_ZERO, 2)
    assert search_certificate(F0_ZERO, red.code.inner, nram2eso.theorem_budget(red.code.n, 2), 6) is None
    assert _decide(red) == lc.UNSAT


def test_reduce_problem_is_linear_sized():
    ratios = [eso2lc.reduce_problem(unary_structure([0] * m), F0_ZERO, 2).stages["size"] / m
              for m in (4, 9, 16)]
    med = statistics.median(ratios)
    assert all(med / 2 <= r <= 2 * med for r in ratios)


def test_reduce_problem_checks_signature():
    from programs import suite
    with pytest.raises(ValidationError):
        eso2lc.reduce_problem(unary_structure([0, 1, 2, 3]), suite()["accept"], 2)
