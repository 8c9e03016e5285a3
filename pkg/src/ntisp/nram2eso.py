"""Compile an NRAM program into an ESO(1,1) formula over the extended
domain [cn], build witness tables from accepting runs, and fold the
extended domain back onto [n]."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from . import logic
from .eso import IDENT, EsoFormula, ExSym, first_failure
from .errors import ValidationError
from .logic import (FALSE, TRUE, App, Eq, Not, Num, Rel, Succ, Var, conj, disj, eq,
                    implies, neq)
from .nram import ACCEPT, Budget, NramProgram, run
from .structures import FUNC, REL, Signature, Structure, Symbol, all_tuples, order_relation

X, Y = Var("x1"), Var("y1")
L_NAME, LT_NAME = "L", "lt"


def theorem_budget(n: int, c: int) -> Budget:
    """Time c*n^2, addresses and contents below cn."""
    return Budget(c * n * n, c * n - 1, c * n - 1)


def padded_name(name: str) -> str:
    return f"F_{name}"


@dataclass(frozen=True)
class CompiledFormula:
    formula: EsoFormula
    c: int
    program: NramProgram
    symbol_map: dict
    parts: dict

    @property
    def registers(self) -> list[str]:
        return [f"B{i}" for i in range(1, self.program.d + 1)]


SKOLEM = ("sk_N_x", "sk_R_t", "sk_R_z", "sk_R_t2", "sk_R_u", "sk_RA_x", "sk_RA_u")


def _f(name, t, tail=Y):
    return App(name, (t, tail))


def _lt(a, b):
    return Rel(LT_NAME, (a, b))


def _top(t):
    return eq(Succ(t), t)


def _type_is(program: NramProgram, types, at) -> logic.Formula:
    """I(t,T) is an instruction of one of the given types."""
    js = [j for j in range(1, len(program) + 1) if program[j].type in types]
    return disj(*(eq(_f("I", at), Num(j)) for j in js)) if js else FALSE


def compile(program: NramProgram, c: int) -> CompiledFormula:
    if c < 2:
        raise ValidationError("c must be at least 2 so that n lies in [cn]")
    d = program.d
    regs = [f"B{i}" for i in range(1, d + 1)]
    t = X
    in_T = _lt(Y, App(L_NAME))
    T_below_last = _lt(Succ(Y), App(L_NAME))
    last_T = eq(Succ(Y), App(L_NAME))
    I, A, RA, RpA, G = (_f(s, t) for s in ("I", "A", "RA", "RpA", "G"))
    B = {r: _f(r, t) for r in regs}
    lam = len(program)

    # phi_1, under y1 = 0 so that tails stay restricted
    phi1 = implies(eq(Y, Num(0)),
                   conj(eq(_f("I", Num(0)), Num(1)), eq(_f("A", Num(0)), Num(0)),
                        *(eq(_f(r, Num(0)), Num(0)) for r in regs)))

    def step_rules(nxt) -> logic.Formula:
        """Case tables relating instant (t,T) to the successor term builder nxt(name)."""
        rules = []
        for j in range(1, lam + 1):
            ins = program[j]
            at_j = eq(I, Num(j))
            if ins.op == "IFEQ":
                i, i0, i1 = ins.args
                same = eq(A, B[f"B{i}"])
                rules.append(implies(conj(at_j, same), eq(nxt("I"), Num(i0))))
                rules.append(implies(conj(at_j, Not(same)), eq(nxt("I"), Num(i1))))
            elif ins.op in ("ACCEPT", "REJECT"):
                rules.append(implies(at_j, eq(nxt("I"), I)))
            else:
                rules.append(implies(at_j, eq(nxt("I"), Succ(I))))
        # accumulator A
        a_next = nxt("A")
        rules.append(implies(_type_is(program, {1}, t), eq(a_next, App(L_NAME))))
        rules.append(implies(_type_is(program, {2}, t), eq(a_next, Num(0))))
        rules.append(implies(_type_is(program, {3}, t),
                             conj(eq(a_next, Succ(A)), neq(Succ(A), A))))
        rules.append(implies(_type_is(program, {4}, t), conj(
            implies(eq(A, Num(0)), eq(a_next, Num(0))),
            implies(neq(A, Num(0)), conj(eq(Succ(a_next), A), neq(a_next, A))))))
        rules.append(implies(_type_is(program, {5}, t), eq(a_next, G)))
        for j in program.indices_of(6):
            name = program[j].args[0]
            arity = program.input_signature[name].arity
            args = tuple(B[f"B{k}"] for k in range(1, arity + 1))
            rules.append(implies(eq(I, Num(j)), conj(
                *(_lt(a, App(L_NAME)) for a in args),
                eq(a_next, App(padded_name(name), args)))))
        rules.append(implies(_type_is(program, {7}, t), eq(a_next, RA)))
        rules.append(implies(Not(_type_is(program, {1, 2, 3, 4, 5, 6, 7}, t)), eq(a_next, A)))
        for r in regs:
            i = int(r[1:])
            setb = disj(*(eq(I, Num(j)) for j in program.indices_of(8) if program[j].args[0] == i))
            rules.append(implies(setb, eq(nxt(r), A)))
            rules.append(implies(neg_or_true(setb), eq(nxt(r), B[r])))
        return conj(*rules)

    # R'_A is the content of R(A) after the step at the same instant.
    rpa_rules = []
    for i in range(1, d + 1):
        store_i = disj(*(eq(I, Num(j)) for j in program.indices_of(9) if program[j].args[0] == i))
        rpa_rules.append(implies(store_i, eq(RpA, B[f"B{i}"])))
    rpa_rules.append(implies(Not(_type_is(program, {9}, t)), eq(RpA, RA)))
    phi_rpa = implies(in_T, conj(*rpa_rules))

    inner = lambda name: App(name, (Succ(t), Y))
    crossing = lambda name: App(name, (Num(0), Succ(Y)))
    same = lambda name: App(name, (t, Y))
    phi2 = implies(in_T, conj(
        implies(Not(_top(t)), step_rules(inner)),
        implies(conj(_top(t), Not(last_T)), step_rules(crossing)),
        implies(conj(_top(t), last_T), step_rules(same)),
    ))

    def N(z):
        return _f("N1", z), _f("N0", z)

    def is_pair(z, a, tt):
        n1, n0 = N(z)
        return conj(eq(n1, a), eq(n0, tt))

    def lex_lt(p, q):
        return disj(_lt(p[0], q[0]), conj(eq(p[0], q[0]), _lt(p[1], q[1])))

    # phi_N: surjection onto {(A(t,T), t)} and strictly increasing numbering.
    skx = _f("sk_N_x", t)
    phiN = implies(in_T, conj(
        is_pair(skx, A, t),
        implies(Not(_top(t)), lex_lt(N(t), N(Succ(t)))),
    ))

    # phi_R with x := x1 and Skolem witnesses for t, z, t', u.
    x = X
    st, sz, st2, su = (_f(s, x) for s in ("sk_R_t", "sk_R_z", "sk_R_t2", "sk_R_u"))
    A_ = lambda tt: _f("A", tt)
    R_next = App("R", (x, Succ(Y)))
    R_now = _f("R", x)
    accessed = conj(
        eq(A_(st), x), is_pair(sz, A_(st), st),
        disj(_top(sz), conj(Not(_top(sz)), is_pair(Succ(sz), A_(st2), st2),
                            neq(A_(st), A_(st2)))),
        eq(R_next, _f("RpA", st)))
    all_above = conj(is_pair(Num(0), A_(st), st), _lt(x, A_(st)), eq(R_next, R_now))
    all_below = conj(_top(sz), is_pair(sz, A_(st), st), _lt(A_(st), x), eq(R_next, R_now))
    between = conj(_lt(A_(st), x), _lt(x, A_(su)), is_pair(sz, A_(st), st),
                   is_pair(Succ(sz), A_(su), su), eq(R_next, R_now))
    phiR = conj(
        implies(eq(Y, Num(0)), eq(R_now, Num(0))),
        implies(T_below_last, disj(accessed, all_above, all_below, between)),
    )

    # phi_{R_A}; x must not be the top element or succ(x) = x.
    rx, ru = _f("sk_RA_x", t), _f("sk_RA_u", t)
    first = conj(is_pair(Num(0), A, t), eq(RA, App("R", (A, Y))))
    later = conj(Not(_top(rx)), is_pair(Succ(rx), A, t), is_pair(rx, A_(ru), ru),
                 implies(eq(A, A_(ru)), eq(RA, _f("RpA", ru))),
                 implies(neq(A, A_(ru)), eq(RA, App("R", (A, Y)))))
    phiRA = implies(in_T, disj(first, later))

    phi4 = implies(conj(last_T, _top(t)), eq(I, Num(lam)))

    parts = {"phi1": phi1, "phi2": phi2, "phiRpA": phi_rpa, "phiN": phiN,
             "phiR": phiR, "phiRA": phiRA, "phi4": phi4}
    names = ["I", "A", *regs, "RA", "RpA", "G", "N0", "N1", "R", *SKOLEM]
    exs = tuple(ExSym(nm, 2, IDENT if nm in SKOLEM else None) for nm in names)
    matrix = conj(*parts.values())
    smap = {"inputs": {s.name: padded_name(s.name) for s in program.input_signature},
            "S": {i: program.indices_of(i) for i in range(1, 13)},
            "L": L_NAME, "lt": LT_NAME}
    return CompiledFormula(EsoFormula(exs, 1, 1, matrix), c, program, smap, parts)


def neg_or_true(f):
    return TRUE if f == FALSE else Not(f)


# ------------------------------------------------------------ inputs over [cn]

def pad_input(s: Structure, c: int) -> dict:
    """Each input symbol as a function over [cn], 0 outside [n]^k."""
    n, big = s.n, c * s.n
    out = {}
    for sym in s.signature:
        table = s.tables[sym.name]
        padded = []
        for args in all_tuples(big, sym.arity):
            if all(a < n for a in args):
                idx = 0
                for a in args:
                    idx = idx * n + a
                padded.append(table[idx])
            else:
                padded.append(0)
        out[padded_name(sym.name)] = tuple(padded)
    return out


def extended_structure(s: Structure, c: int) -> Structure:
    """The structure over [cn] the compiled formula is evaluated on."""
    big = c * s.n
    syms = [Symbol(padded_name(x.name), FUNC, x.arity) for x in s.signature]
    tables = pad_input(s, c)
    syms += [Symbol(L_NAME, FUNC, 0), Symbol(LT_NAME, REL, 2)]
    tables[L_NAME] = (s.n,)
    tables[LT_NAME] = order_relation(big)
    return Structure(big, Signature(tuple(syms)), tables)


def check_applicable(program: NramProgram, n: int, c: int):
    if len(program) >= c * n:
        raise ValidationError(f"program length {len(program)} needs cn > lambda; got cn={c * n}")


# ------------------------------------------------------------------ witnesses

class WitnessError(ValidationError):
    pass


def build_witness(program: NramProgram, s: Structure, cert: Sequence[int], c: int) -> dict:
    """Witness tables over [cn] from the run of ``program`` on ``cert``."""
    n = s.n
    M = c * n
    check_applicable(program, n, c)
    res = run(program, s, cert, theorem_budget(n, c), trace=True)
    if not res.accepted:
        raise WitnessError("run does not accept within budget")
    trace = res.trace
    total = M * n
    # Extend the trace so every instant has a configuration; the final one repeats.
    configs = list(trace) + [trace[-1]] * (total - len(trace))
    regs = [f"B{i}" for i in range(1, program.d + 1)]
    tab = {name: [0] * (M * M) for name in ["I", "A", *regs, "RA", "RpA", "G", "N0", "N1", "R", *SKOLEM]}

    def put(name, a, T, v):
        tab[name][a * M + T] = v

    guesses = iter(cert)
    memory_at = []  # memory before each instant
    for k, conf in enumerate(configs):
        memory_at.append(dict(conf.memory))
    for k, conf in enumerate(configs):
        T, t = divmod(k, M)
        ins = program[conf.pc]
        put("I", t, T, conf.pc)
        put("A", t, T, conf.A)
        for i, r in enumerate(regs):
            put(r, t, T, conf.B[i])
        ra = memory_at[k].get(conf.A, 0) if conf.A < M else 0
        put("RA", t, T, ra)
        rpa = conf.B[ins.args[0] - 1] if ins.op == "STORE" else ra
        put("RpA", t, T, rpa)
        if ins.op == "GUESS" and k < len(trace) - 1:
            put("G", t, T, next(guesses))
    for T in range(n):
        block = range(T * M, (T + 1) * M)
        pairs = sorted((configs[k].A, k - T * M) for k in block)
        pos = {p: i for i, p in enumerate(pairs)}
        for i, (a, tt) in enumerate(pairs):
            put("N1", i, T, a)
            put("N0", i, T, tt)
        for tt in range(M):
            a = configs[T * M + tt].A
            x = pos[(a, tt)]
            put("sk_N_x", tt, T, x)
            if x > 0:
                put("sk_RA_x", tt, T, x - 1)
                put("sk_RA_u", tt, T, pairs[x - 1][1])
        mem0 = memory_at[T * M]
        for addr in range(M):
            put("R", addr, T, mem0.get(addr, 0))
        if T < n - 1:
            _skolem_R(tab, put, pairs, M, T)
    return {k: tuple(v) for k, v in tab.items()}


def _skolem_R(tab, put, pairs, M, T):
    """Witnesses for the four cases of the register-resumption clause."""
    addrs = [a for a, _ in pairs]
    for x in range(M):
        last = [i for i, (a, _) in enumerate(pairs) if a == x]
        if last:
            z = last[-1]
            put("sk_R_t", x, T, pairs[z][1])
            put("sk_R_z", x, T, z)
            if z < M - 1:
                put("sk_R_t2", x, T, pairs[z + 1][1])
        elif x < addrs[0]:
            put("sk_R_t", x, T, pairs[0][1])
        elif x > addrs[-1]:
            put("sk_R_t", x, T, pairs[-1][1])
            put("sk_R_z", x, T, M - 1)
        else:
            z = max(i for i, a in enumerate(addrs) if a < x)
            put("sk_R_t", x, T, pairs[z][1])
            put("sk_R_z", x, T, z)
            put("sk_R_u", x, T, pairs[z + 1][1])


def check_witness(cf: CompiledFormula, s: Structure, witness: dict):
    """First point (t, T) where the matrix fails, or None."""
    return first_failure(extended_structure(s, cf.c), cf.formula, witness)


def extract_certificate(cf: CompiledFormula, n: int, witness: dict) -> list[int]:
    """Guess values read off G at guess instants, in run order."""
    M = cf.c * n
    out = []
    I, G = witness["I"], witness["G"]
    for k in range(M * n):
        T, t = divmod(k, M)
        j = I[t * M + T]
        if 1 <= j <= len(cf.program) and cf.program[j].op == "GUESS":
            out.append(G[t * M + T])
    return out


def auto_c(program: NramProgram, s: Structure, cert: Optional[Sequence[int]] = None,
           cap: int = 64, guess_bound=None):
    """Smallest power-of-two c >= 2 (up to cap) for which an accepting run fits."""
    from .nram import search_certificate
    c = 2
    while c <= cap:
        if len(program) < c * s.n:
            budget = theorem_budget(s.n, c)
            if cert is not None:
                if run(program, s, cert, budget).accepted:
                    return c, list(cert)
            else:
                found = search_certificate(program, s, budget, guess_bound or c * s.n)
                if found is not None:
                    return c, found
        c *= 2
    return None, None


# ------------------------------------------------------------------- folding

@dataclass(frozen=True)
class FoldedFormula:
    formula: EsoFormula
    c: int
    n: int
    original: EsoFormula


def folded_name(name: str, digit: int, i: int) -> str:
    return f"{name}_{digit}_{i}"


def fold_domain(cf: CompiledFormula, n: int) -> FoldedFormula:
    """Represent every element of [cn] as in + x0 with x0 in [n], i in [c].

    Each existential g is replaced by g_0_i (low digit) and g_1_i (high
    digit) for i < c. Input symbols F_f become the original f, L becomes
    the pair (0, 1) and lt a lexicographic test on pairs; lt over [n]
    stays an input relation.
    """
    inputs = {v: k for k, v in cf.symbol_map["inputs"].items()}
    return fold_formula(cf.formula, cf.c, n, inputs)


def fold_formula(phi: EsoFormula, c: int, n: int, inputs: dict) -> FoldedFormula:
    """Fold a (1,1) formula over [cn] whose clauses are vacuous for y1 >= n.

    ``inputs`` maps padded input names to the original symbols over [n].
    Existentials may be unary or binary with the iteration variable last.
    """
    if c < 2 or c > n:
        raise ValidationError("folding needs 2 <= c <= n so high digits fit in [n]")
    if phi.s != 1 or phi.r != 1:
        raise ValidationError("folding is defined for s = r = 1")
    for e in phi.existentials:
        if e.arity not in (1, 2):
            raise ValidationError(f"symbols of unsupported shape: {e}")
    exs = {e.name for e in phi.existentials}
    top_lo, top_hi = n - 1, c - 1
    range_guards = []

    def cases(term, xhi):
        """List of (condition, low term, high digit) covering all values."""
        if isinstance(term, Var):
            if term.name == "x1":
                return [(TRUE, term, xhi)]
            return [(TRUE, term, 0)]  # y1 ranges over [n] only
        if isinstance(term, Num):
            v = min(term.value, c * n - 1)
            return [(TRUE, Num(v % n), v // n)]
        if isinstance(term, Succ):
            out = []
            for cond, lo, hi in cases(term.arg, xhi):
                still = eq(Succ(lo), lo)
                out.append((conj(cond, Not(still)), Succ(lo), hi))
                if hi < top_hi:
                    out.append((conj(cond, still), Num(0), hi + 1))
                else:
                    out.append((conj(cond, still), lo, hi))
            return out
        if isinstance(term, App):
            if term.name == L_NAME:
                return [(TRUE, Num(0), 1)]  # n = 1*n + 0, as c >= 2
            if term.name in inputs:
                out = []
                for combo in _product([cases(a, xhi) for a in term.args]):
                    cond = conj(*(k[0] for k in combo))
                    if all(k[2] == 0 for k in combo):
                        out.append((cond, App(inputs[term.name], tuple(k[1] for k in combo)), 0))
                    else:
                        out.append((cond, Num(0), 0))
                return out
            if term.name in exs:
                if len(term.args) == 1:
                    out = []
                    for cond, lo, hi in cases(term.args[0], xhi):
                        g0 = App(folded_name(term.name, 0, hi), (lo,))
                        g1 = App(folded_name(term.name, 1, hi), (lo,))
                        for k in range(c):
                            out.append((conj(cond, eq(g1, Num(k))), g0, k))
                    return out
                first, tail = term.args
                tail_cases = cases(tail, xhi)
                if len(tail_cases) == 1:
                    tail_lo = tail_cases[0][1]
                else:
                    # succ(y1) with y1 < n: only y1 = n-1 differs, and every
                    # clause using it is vacuous there; saturate inside [n].
                    tail_lo = tail if isinstance(tail, Var) else Succ(tail.arg)
                out = []
                for cond, lo, hi in cases(first, xhi):
                    g0 = App(folded_name(term.name, 0, hi), (lo, tail_lo))
                    g1 = App(folded_name(term.name, 1, hi), (lo, tail_lo))
                    for k in range(c):
                        out.append((conj(cond, eq(g1, Num(k))), g0, k))
                return out
        raise ValidationError(f"cannot fold term {term}")

    def fold_atom(a, xhi):
        if isinstance(a, Eq):
            out = []
            for c1, l1, h1 in cases(a.left, xhi):
                for c2, l2, h2 in cases(a.right, xhi):
                    if h1 == h2:
                        out.append(conj(c1, c2, eq(l1, l2)))
            return disj(*out)
        if isinstance(a, Rel) and a.name == LT_NAME:
            out = []
            for c1, l1, h1 in cases(a.args[0], xhi):
                for c2, l2, h2 in cases(a.args[1], xhi):
                    if h1 < h2:
                        out.append(conj(c1, c2))
                    elif h1 == h2:
                        out.append(conj(c1, c2, Rel(LT_NAME, (l1, l2))))
            return disj(*out)
        raise ValidationError(f"cannot fold atom {a}")

    def fold(f, xhi):
        if isinstance(f, (Eq, Rel)):
            return fold_atom(f, xhi)
        if isinstance(f, Not):
            return Not(fold(f.arg, xhi))
        parts = [fold(g, xhi) for g in f.items]
        return conj(*parts) if isinstance(f, logic.And) else disj(*parts)

    blocks = [fold(phi.matrix, i) for i in range(c)]
    new_exs = []
    for e in phi.existentials:
        for i in range(c):
            for digit in (0, 1):
                new_exs.append(ExSym(folded_name(e.name, digit, i), e.arity, e.tail))
            hi = App(folded_name(e.name, 1, i), (X, Y)[:e.arity])
            range_guards.append(disj(*(eq(hi, Num(k)) for k in range(c))))
    matrix = conj(*range_guards, *blocks)
    return FoldedFormula(EsoFormula(tuple(new_exs), 1, 1, matrix), c, n, phi)


def _product(lists):
    out = [()]
    for lst in lists:
        out = [o + (x,) for o in out for x in lst]
    return out


def fold_witness(ff: FoldedFormula, witness: dict) -> dict:
    """Digit tables over [n] from witness tables over [cn]."""
    n, c = ff.n, ff.c
    M = c * n
    out = {}
    for e in ff.original.existentials:
        g = witness[e.name]
        for i in range(c):
            lo, hi = [], []
            for args in all_tuples(n, e.arity):
                idx = (i * n + args[0]) * (M if e.arity == 2 else 1) + sum(args[1:])
                v = g[idx]
                lo.append(v % n)
                hi.append(v // n)
            out[folded_name(e.name, 0, i)] = tuple(lo)
            out[folded_name(e.name, 1, i)] = tuple(hi)
    return out


def unfold_witness(ff: FoldedFormula, digits: dict) -> dict:
    """Inverse of fold_witness; binary rows with T >= n are zero."""
    n, c = ff.n, ff.c
    M = c * n
    out = {}
    for e in ff.original.existentials:
        table = [0] * (M ** e.arity)
        for i in range(c):
            lo, hi = digits[folded_name(e.name, 0, i)], digits[folded_name(e.name, 1, i)]
            for k, args in enumerate(all_tuples(n, e.arity)):
                idx = (i * n + args[0]) * (M if e.arity == 2 else 1) + sum(args[1:])
                table[idx] = hi[k] * n + lo[k]
        out[e.name] = tuple(table)
    return out


def folded_structure(s: Structure) -> Structure:
    """Input of the folded formula: the original symbols plus the order on [n]."""
    return s.extended([(Symbol(LT_NAME, REL, 2), order_relation(s.n))])


# ------------------------------------------------------- complete decision

class MatrixDecider:
    """Decide satisfiability of a compiled formula over [cn] for any input
    of size n. The formula is unfolded and CNF-encoded once with the padded
    input tables left free; each input then only fixes those entries."""

    def __init__(self, cf: CompiledFormula, n: int):
        from . import eso2lc, lc

        self.cf, self.n = cf, n
        self.unfolded = eso2lc.unfold(cf.formula, cf.c * n, range_guards=False)
        blank = Structure(n, cf.program.input_signature,
                          {x.name: (0,) * n ** x.arity for x in cf.program.input_signature})
        inst = eso2lc.unpadded_instance(self.unfolded, extended_structure(blank, cf.c))
        self.free = {padded_name(x.name) for x in cf.program.input_signature}
        inst.op = {k: v for k, v in inst.op.items() if k not in self.free}
        self.instance = inst
        self.encoding = lc.SatEncoding(inst)

    def fixed_entries(self, s: Structure) -> dict:
        out = {}
        for name, table in pad_input(s, self.cf.c).items():
            arity = s.signature[name[len(padded_name("")):]].arity
            for idx, args in enumerate(all_tuples(self.cf.c * self.n, arity)):
                out[(name, (args + (0, 0))[:2])] = table[idx]
        return out

    def decide(self, s: Structure):
        """(satisfiable, witness tables over [cn] or None)."""
        from . import eso2lc

        if s.n != self.n:
            raise ValidationError(f"decider was built for n={self.n}, got n={s.n}")
        res = self.encoding.solve(self.fixed_entries(s))
        if res.verdict != "sat":
            return False, None
        assignment = {k: v for k, v in res.assignment.items() if k[0] not in self.free}
        return True, eso2lc.assignment_to_witness(self.unfolded, assignment)

    def close(self):
        self.encoding.close()
