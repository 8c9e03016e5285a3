"""From an ESO(1,1) formula over a structure to a Layered-Constraints(2,1)
instance: unfold the first-order part block by block, then pad the
domain linearly."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import lc, logic
from .eso import EsoFormula, require_restricted
from .errors import ValidationError
from .lc import LcInstance, PaddedTable
from .logic import App, Eq, Not, Num, Rel, Succ, SuccVec, Var, conj, disj
from .structures import Structure, all_tuples

SUCC_OP = "succ"


def slice_name(name: str, b: int) -> str:
    return f"{name}__{b}"


@dataclass
class UnfoldedConjunction:
    n: int
    blocks: list          # F_0 .. F_{n-1}
    taus: list            # per LC layer, {slice name: 1}
    k: int                # length(psi_b(a)) + 1, so length(F_b) = k*n - 1
    existentials: dict    # name -> original arity (0, 1 or 2)
    inputs: dict          # name -> (arity, is_relation)
    uses_succ: bool = False

    @property
    def N(self) -> int:
        return self.k * self.n


def unfold(phi: EsoFormula, n: int, range_guards: bool = True) -> UnfoldedConjunction:
    """Ground every (x, y) := (a, b) and slice each binary existential by
    its iteration argument; lower-arity existentials are first lifted to
    binary symbols that are constant along y.

    With ``range_guards`` each piece psi_b(a) starts by forcing every
    slice value at a into [n], which keeps the padded instance over [N]
    equisatisfiable. Without them the blocks are the bare unfolding.
    """
    require_restricted(phi)
    if (phi.s, phi.r) != (1, 1):
        raise ValidationError("unfolding is defined for s = r = 1")
    if n < 1:
        raise ValidationError("need n >= 1")
    ex_arity = {e.name: e.arity for e in phi.existentials}
    rel_names = {a.name for a in logic.atoms(phi.matrix) if isinstance(a, Rel)}
    inputs = {}
    for name, ar in phi.input_symbols().items():
        if ar > 2:
            raise ValidationError(f"input symbol {name} has arity {ar}; operators are binary")
        inputs[name] = (ar, name in rel_names)
    x, y = Var("x1"), Var("y1")

    def lift(t):
        if isinstance(t, App) and t.name in ex_arity and ex_arity[t.name] < 2:
            first = t.args[0] if t.args else Num(0)
            return App(t.name, (first, y))
        return t

    matrix = logic.map_terms(phi.matrix, lift)
    # lifted symbols must not vary with the block
    steady = [Eq(App(name, (x if ar == 1 else Num(0), y)), App(name, (x if ar == 1 else Num(0), Succ(y))))
              for name, ar in ex_arity.items() if ar < 2]
    psi = conj(*steady, matrix)
    uses = [False]

    def ground(t, a, b):
        if isinstance(t, Var):
            return Num(a if t.name == "x1" else b)
        if isinstance(t, Num):
            return Num(min(t.value, n - 1))
        if isinstance(t, (Succ, SuccVec)):
            inner = ground(t.arg if isinstance(t, Succ) else t.args[0], a, b)
            if isinstance(inner, Num):
                return Num(min(inner.value + 1, n - 1))
            uses[0] = True
            return App(SUCC_OP, (inner, Num(0)))
        if t.name in ex_arity:
            first, tail = t.args
            col = b if tail == y else min(b + 1, n - 1)
            return App(slice_name(t.name, col), (ground(first, a, b),))
        ar, _ = inputs[t.name]
        args = tuple(ground(u, a, b) for u in t.args)
        return App(t.name, (args + (Num(0), Num(0)))[:2])

    def gformula(f, a, b):
        if isinstance(f, Eq):
            return Eq(ground(f.left, a, b), ground(f.right, a, b))
        if isinstance(f, Rel):
            return Eq(ground(App(f.name, f.args), a, b), Num(1 if n > 1 else 0))
        if isinstance(f, Not):
            return Not(gformula(f.arg, a, b))
        parts = [gformula(g, a, b) for g in f.items]
        return type(f)(tuple(parts))

    def guard(a, b):
        # both columns a piece can touch; at b = n-1 they coincide, which
        # keeps every piece the same length
        cols = (b, min(b + 1, n - 1))
        return conj(*(disj(*(Eq(App(slice_name(name, col), (Num(a),)), Num(v)) for v in range(n)))
                      for name in ex_arity for col in cols))

    blocks = []
    piece_len = None
    for b in range(n):
        pieces = []
        for a in range(n):
            g = gformula(psi, a, b)
            piece = conj(guard(a, b), g) if ex_arity and range_guards else g
            piece_len = logic.length(piece) if piece_len is None else piece_len
            pieces.append(piece)
        blocks.append(logic.And(tuple(pieces)) if len(pieces) > 1 else pieces[0])
    k = (piece_len or 0) + 1
    names = list(ex_arity)
    taus = []
    for i in range(1, n + 1):
        if i == 1:
            cols = [0, 1] if n > 1 else [0]
        elif i < n:
            cols = [i]
        else:
            cols = []
        taus.append({slice_name(nm, col): 1 for nm in names for col in cols})
    if rel_names & set(ex_arity):
        raise ValidationError("existential relations are not supported")
    return UnfoldedConjunction(n, blocks, taus, k, ex_arity, inputs, uses[0])


def _operator_tables(u: UnfoldedConjunction, sigma: Structure) -> dict:
    n = u.n
    if sigma.n != n:
        raise ValidationError(f"structure has n={sigma.n}, unfolding was for n={n}")
    out = {}
    for name, (ar, is_rel) in u.inputs.items():
        if name not in sigma.signature or sigma.signature[name].arity != ar:
            raise ValidationError(f"structure lacks input symbol {name}/{ar}")
        tab = sigma.tables[name]
        if ar == 2:
            inner = tab
        elif ar == 1:
            inner = tuple(tab[a] for a in range(n) for _ in range(n))
        else:
            inner = (tab[0],) * (n * n)
        if is_rel and n == 1:
            inner = tuple(0 if v else 1 for v in inner)  # truth is encoded as 0 when [n] = {0}
        out[name] = tuple(inner)
    out[SUCC_OP] = tuple(min(a + 1, n - 1) for a in range(n) for _ in range(n))
    return out


def pad_to_lc(u: UnfoldedConjunction, sigma: Structure) -> LcInstance:
    """Instance over [N], N = k*n, with operator tables zero outside [n]^2."""
    N = u.N
    ops = {name: PaddedTable(inner, u.n, N, 2) for name, inner in _operator_tables(u, sigma).items()}
    return LcInstance(N, 2, 1, ops, list(u.blocks), [dict(t) for t in u.taus], 1)


def unpadded_instance(u: UnfoldedConjunction, sigma: Structure) -> LcInstance:
    """The same layers over [n]; layer lengths exceed n, so the length
    factor is raised to fit."""
    ops = _operator_tables(u, sigma)
    longest = max((logic.length(f) for f in u.blocks), default=1)
    return LcInstance(u.n, 2, 1, ops, list(u.blocks), [dict(t) for t in u.taus],
                      max(1, -(-longest // u.n)))


# ---------------------------------------------------------- witness transport

def witness_to_assignment(u: UnfoldedConjunction, witness: dict) -> dict:
    """Column b of each existential table becomes the slice symbol f^b."""
    n = u.n
    out = {}
    for name, ar in u.existentials.items():
        tab = witness[name]
        for b in range(n):
            for a in range(n):
                if ar == 2:
                    v = tab[a * n + b]
                elif ar == 1:
                    v = tab[a]
                else:
                    v = tab[0] if a == 0 else 0
                out[(slice_name(name, b), (a,))] = v
    return out


def assignment_to_witness(u: UnfoldedConjunction, assignment: dict) -> dict:
    n = u.n
    get = lambda key: assignment.get(key, 0)
    out = {}
    for name, ar in u.existentials.items():
        if ar == 2:
            out[name] = tuple(get((slice_name(name, b), (a,))) for a in range(n) for b in range(n))
        elif ar == 1:
            out[name] = tuple(get((slice_name(name, 0), (a,))) for a in range(n))
        else:
            out[name] = (get((slice_name(name, 0), (0,))),)
    for name, tab in out.items():
        if any(v >= n for v in tab):
            raise ValidationError(f"assignment gives {name} a value outside [{n}]")
    return out


# ------------------------------------------------------------------ pipeline

@dataclass
class Reduction:
    instance: LcInstance
    unfolded: UnfoldedConjunction
    code: object
    compiled: object
    folded: object
    stages: dict = field(default_factory=dict)


def reduce_problem(s: Structure, program, c: int) -> Reduction:
    """Unary structure -> code(S) over [n] -> compiled and folded formula
    -> unfolded and padded Layered-Constraints(2,1) instance."""
    from . import nram2eso
    from .structures import code_signature, encode_unary_to_dary

    expected = code_signature(2)
    if program.input_signature != expected:
        raise ValidationError("program must read the binary code symbols g0, g1")
    code = encode_unary_to_dary(s, 2)
    n = code.n
    nram2eso.check_applicable(program, n, c)
    cf = nram2eso.compile(program, c)
    ff = nram2eso.fold_domain(cf, n)
    sigma = nram2eso.folded_structure(code.inner)
    u = unfold(ff.formula, n)
    inst = pad_to_lc(u, sigma)
    return Reduction(inst, u, code, cf, ff,
                     {"m": s.n, "n": n, "k": u.k, "N": u.N, "size": inst.size(),
                      "sigma": sigma})


def transport_run(red: Reduction, program, cert) -> dict:
    """LC assignment for the padded instance from an accepting run on code(S)."""
    from . import nram2eso
    w = nram2eso.build_witness(program, red.code.inner, cert, red.compiled.c)
    digits = nram2eso.fold_witness(red.folded, w)
    return witness_to_assignment(red.unfolded, digits)
