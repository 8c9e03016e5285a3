"""Existential second-order formulas  exists g . forall x1..xs forall y1..yr psi
with (s, r)-restricted matrices, and two model checkers for them."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import logic
from .errors import ParseError, TooLargeError, ValidationError
from .logic import App, Formula, Num, Succ, SuccVec, Var, compile_formula, succ_delta
from .structures import FUNC, REL, Signature, Structure, Symbol, all_tuples, load_structure

IDENT, SUCC = "ident", "succ"

DEFAULT_BRUTE_CAP = 2 ** 24


@dataclass(frozen=True)
class ExSym:
    name: str
    arity: int
    tail: Optional[str] = None  # IDENT, SUCC, or None for "either form"

    def __str__(self):
        return f"{self.name}/{self.arity}" + (f":{self.tail}" if self.tail else "")


@dataclass(frozen=True)
class EsoFormula:
    existentials: tuple[ExSym, ...]
    s: int
    r: int
    matrix: Formula

    @property
    def variables(self) -> list[str]:
        return [f"x{i}" for i in range(1, self.s + 1)] + [f"y{j}" for j in range(1, self.r + 1)]

    @property
    def existential_names(self) -> set[str]:
        return {e.name for e in self.existentials}

    def existential(self, name) -> ExSym:
        for e in self.existentials:
            if e.name == name:
                return e
        raise KeyError(name)

    def input_symbols(self) -> dict[str, int]:
        used = logic.symbols_used(self.matrix)
        return {k: v for k, v in used.items() if k not in self.existential_names}

    def __str__(self):
        head = ""
        if self.existentials:
            head = "exists " + ", ".join(map(str, self.existentials)) + " "
        head += " ".join(f"forall {v}" for v in self.variables)
        return f"{head} : {self.matrix}"


def parse_eso(text: str, source=None) -> EsoFormula:
    text = " ".join(line.split("#", 1)[0] for line in text.splitlines()).strip()
    toks = logic.tokenize(text)
    i = 0
    exs = []

    def expect(tok):
        nonlocal i
        if i >= len(toks) or toks[i] != tok:
            got = toks[i] if i < len(toks) else "end of input"
            raise ParseError(f"expected {tok!r}, got {got!r}", None, source)
        i += 1

    if toks and toks[0] == "exists":
        i = 1
        while True:
            name = toks[i]
            i += 1
            expect("/")
            arity = int(toks[i])
            i += 1
            tail = None
            if i + 1 < len(toks) and toks[i] == ":" and toks[i + 1] in (IDENT, SUCC, "any"):
                tail = None if toks[i + 1] == "any" else toks[i + 1]
                i += 2
            exs.append(ExSym(name, arity, tail))
            if i < len(toks) and toks[i] == ",":
                i += 1
                continue
            break
    xs, ys = [], []
    while i < len(toks) and toks[i] == "forall":
        v = toks[i + 1]
        (xs if v.startswith("x") else ys).append(v)
        i += 2
    expect(":")
    s, r = len(xs), len(ys)
    if xs != [f"x{k}" for k in range(1, s + 1)] or ys != [f"y{k}" for k in range(1, r + 1)]:
        raise ParseError("universal variables must be x1..xs then y1..yr", None, source)
    p = logic._Parser(toks[i:], None)
    matrix = p.formula()
    if p.peek() is not None:
        raise ParseError(f"trailing input starting at {p.peek()!r}", None, source)
    return EsoFormula(tuple(exs), s, r, matrix)


# -------------------------------------------------------------- restriction

@dataclass(frozen=True)
class Violation:
    message: str
    subterm: object

    def __str__(self):
        return f"{self.message}: {self.subterm}"


def _tail_form(args: Sequence, delta: int) -> Optional[str]:
    ys = tuple(Var(f"y{j}") for j in range(1, delta + 1))
    if tuple(args) == ys:
        return IDENT
    if delta == 1 and len(args) == 1 and args[0] == Succ(ys[0]):
        return SUCC
    if tuple(args) == tuple(SuccVec(k, ys) for k in range(delta)):
        return SUCC
    return None


def validate_restricted(phi: EsoFormula, inputs: Optional[Signature] = None) -> list[Violation]:
    """Every violation of the (s, r) restriction; an empty list means ok."""
    out: list[Violation] = []
    allowed_vars = set(phi.variables)
    names = [e.name for e in phi.existentials]
    for dup in {x for x in names if names.count(x) > 1}:
        out.append(Violation("duplicate existential symbol", dup))
    for e in phi.existentials:
        if e.arity > phi.s + phi.r:
            out.append(Violation(f"arity exceeds s+r={phi.s + phi.r}", e))
    ex = {e.name: e for e in phi.existentials}
    relation_atoms = [a for a in logic.atoms(phi.matrix) if isinstance(a, logic.Rel)]
    for a in relation_atoms:
        if a.name in ex:
            out.append(Violation("existential symbols are functions, not relations", a))
        elif inputs is not None and (a.name not in inputs or inputs[a.name].arity != len(a.args)):
            out.append(Violation("unknown input relation or wrong arity", a))
    apps = [App(a.name, a.args) for a in relation_atoms]
    for t in list(logic.all_terms(phi.matrix)) + apps:
        if isinstance(t, Var) and t.name not in allowed_vars:
            out.append(Violation("unknown variable", t))
        if not isinstance(t, App) or t in apps and t.name not in ex:
            continue
        if t.name in ex:
            e = ex[t.name]
            if len(t.args) != e.arity:
                out.append(Violation(f"{t.name} expects {e.arity} arguments", t))
                continue
            delta = e.arity - phi.s
            if delta <= 0:
                continue
            form = _tail_form(t.args[phi.s:], delta)
            if form is None:
                msg = ("tail must be y or succ(y)" if delta == 1
                       else f"tail must be (y1..y{delta}) or its lexicographic successor")
                out.append(Violation(msg, t))
            elif e.tail is not None and form != e.tail:
                out.append(Violation(f"{t.name} is declared with tail {e.tail}", t))
        elif inputs is not None:
            if t.name not in inputs or inputs[t.name].arity != len(t.args):
                out.append(Violation("unknown input symbol or wrong arity", t))
    return out


def require_restricted(phi: EsoFormula, inputs=None):
    bad = validate_restricted(phi, inputs)
    if bad:
        raise ValidationError("formula is not restricted: " + "; ".join(map(str, bad[:5])))


# ---------------------------------------------------------------- checking

def input_tables(s: Structure, phi: EsoFormula) -> dict:
    tables = {}
    for name, arity in phi.input_symbols().items():
        if name not in s.signature:
            raise ValidationError(f"structure lacks input symbol {name}")
        if s.signature[name].arity != arity:
            raise ValidationError(f"input symbol {name} has arity {s.signature[name].arity}, used with {arity}")
        tables[name] = s.tables[name]
    return tables


def witness_structure(n: int, phi: EsoFormula, tables: dict) -> Structure:
    sig = Signature(tuple(Symbol(e.name, FUNC, e.arity) for e in phi.existentials))
    return Structure(n, sig, {e.name: tuple(tables[e.name]) for e in phi.existentials})


def load_witness(text: str, source=None) -> Structure:
    return load_structure(text, header="witness", source=source)


def combinations_count(n: int, phi: EsoFormula) -> int:
    entries = sum(n ** e.arity for e in phi.existentials)
    return n ** entries


def holds_with(s: Structure, phi: EsoFormula, witness: dict, checker=None) -> bool:
    """Evaluate the matrix at every point of [n]^(s+r) with full witness tables."""
    return first_failure(s, phi, witness, checker) is None


def first_failure(s: Structure, phi: EsoFormula, witness: dict, checker=None):
    make = checker or compile_formula(phi.matrix, s.n, phi.variables)
    tables = dict(input_tables(s, phi))
    for e in phi.existentials:
        tables[e.name] = witness[e.name]
    fn = make(tables)
    for point in all_tuples(s.n, phi.s + phi.r):
        if not fn(*point):
            return point
    return None


@dataclass
class CheckResult:
    holds: bool
    witness: Optional[Structure] = None
    peak_live: int = 0
    blocks_checked: int = 0


def brute_force_check(s: Structure, phi: EsoFormula, cap: int = DEFAULT_BRUTE_CAP) -> CheckResult:
    """Enumerate all witness tables in lexicographic order."""
    n = s.n
    if combinations_count(n, phi) > cap:
        raise TooLargeError("instance too large for brute force")
    make = compile_formula(phi.matrix, n, phi.variables)
    base = input_tables(s, phi)
    sizes = [n ** e.arity for e in phi.existentials]
    points = list(all_tuples(n, phi.s + phi.r))
    for flat in itertools.product(range(n), repeat=sum(sizes)):
        tables = dict(base)
        pos = 0
        for e, size in zip(phi.existentials, sizes):
            tables[e.name] = flat[pos:pos + size]
            pos += size
        fn = make(tables)
        if all(fn(*p) for p in points):
            return CheckResult(True, witness_structure(n, phi, tables))
    return CheckResult(False)


# ---------------------------------------------------------------- streaming

class DeadSliceRead(AssertionError):
    pass


class SliceWindow:
    """Flat table of an (s+1)-ary symbol where only some y-slices are live.

    Entries are laid out with the iteration variable fastest, so the slice
    of a flat index is ``index % n``. Reading a dead slice raises.
    """

    def __init__(self, n: int, s: int):
        self.n = n
        self.per_slice = n ** s
        self.slices: dict[int, list] = {}
        self.reads: set[int] = set()

    def __getitem__(self, idx):
        y = idx % self.n
        sl = self.slices.get(y)
        if sl is None:
            raise DeadSliceRead(f"read of dead slice y={y}")
        self.reads.add(y)
        return sl[idx // self.n]

    def live_entries(self):
        return sum(len(v) for v in self.slices.values())


def _slice_of(table, n, y):
    return list(table[y::n])


def streaming_check(s: Structure, phi: EsoFormula, witness: Optional[dict] = None,
                    search: bool = False, record_reads: bool = False) -> CheckResult:
    """Block-by-block check over y = 0..n-1 keeping only the y and y+1
    slices of every (s+1)-ary existential; lower-arity existentials are
    held in full. With ``witness`` the pass is one-way; with ``search``
    slice assignments are explored depth first in lexicographic order."""
    if phi.r != 1:
        raise ValidationError("streaming check supports r = 1 only")
    require_restricted(phi)
    if (witness is None) == (not search):
        raise ValidationError("give exactly one of witness or search")
    n, sdim = s.n, phi.s
    low = [e for e in phi.existentials if e.arity <= sdim]
    high = [e for e in phi.existentials if e.arity > sdim]
    make = compile_formula(phi.matrix, n, phi.variables)
    base = input_tables(s, phi)
    windows = {e.name: SliceWindow(n, sdim) for e in high}
    xs_points = list(all_tuples(n, sdim))
    low_live = sum(n ** e.arity for e in low)
    result = CheckResult(False)
    reads_log: list = []

    def meter():
        result.peak_live = max(result.peak_live,
                               low_live + sum(w.live_entries() for w in windows.values()))

    def block_ok(fn, y):
        result.blocks_checked += 1
        for w in windows.values():
            w.reads = set()
        ok = all(fn(*xv, y) for xv in xs_points)
        if record_reads:
            reads_log.append((y, {k: set(w.reads) for k, w in windows.items()}))
        return ok

    if witness is not None:
        tables = dict(base)
        for e in low:
            tables[e.name] = tuple(witness[e.name])
        tables.update(windows)
        fn = make(tables)
        for e in high:
            windows[e.name].slices[0] = _slice_of(witness[e.name], n, 0)
        for y in range(n):
            nxt = min(y + 1, n - 1)
            for e in high:
                w = windows[e.name]
                w.slices.pop(y - 1, None)
                if nxt not in w.slices:
                    w.slices[nxt] = _slice_of(witness[e.name], n, nxt)
            meter()
            if not block_ok(fn, y):
                result.reads = reads_log
                return result
        result.holds = True
        result.witness = witness_structure(n, phi, {**witness})
        result.reads = reads_log
        return result

    slice_size = n ** sdim
    slice_space = [n] * (slice_size * len(high))

    def slice_choices():
        return itertools.product(range(n), repeat=slice_size * len(high))

    def install(y, flat):
        for k, e in enumerate(high):
            windows[e.name].slices[y] = list(flat[k * slice_size:(k + 1) * slice_size])

    for low_flat in itertools.product(range(n), repeat=low_live):
        tables = dict(base)
        pos = 0
        for e in low:
            size = n ** e.arity
            tables[e.name] = low_flat[pos:pos + size]
            pos += size
        tables.update(windows)
        fn = make(tables)
        failed: set = set()  # (y, slice_y) pairs from which no extension exists
        chosen: dict[int, tuple] = {}

        def extend(y, cur) -> bool:
            # slices y (= cur) installed; choose slice y+1, check block y.
            if (y, cur) in failed:
                return False
            if y == n - 1:
                install(y, cur)
                meter()
                if block_ok(fn, y):
                    return True
                failed.add((y, cur))
                return False
            for nxt in slice_choices():
                for w in windows.values():
                    w.slices.clear()
                install(y, cur)
                install(y + 1, nxt)
                meter()
                if block_ok(fn, y):
                    chosen[y + 1] = nxt
                    if extend(y + 1, nxt):
                        return True
            failed.add((y, cur))
            return False

        if not high:
            meter()
            if all(block_ok(fn, y) for y in range(n)):
                result.holds = True
                result.witness = witness_structure(n, phi, tables)
                return result
            continue
        for first in slice_choices():
            for w in windows.values():
                w.slices.clear()
            chosen.clear()
            chosen[0] = first
            if extend(0, first):
                full = dict(tables)
                for k, e in enumerate(high):
                    table = [0] * (n ** e.arity)
                    for y in range(n):
                        part = chosen[y][k * slice_size:(k + 1) * slice_size]
                        table[y::n] = part
                    full[e.name] = tuple(table)
                result.holds = True
                result.witness = witness_structure(n, phi, full)
                return result
    return result
