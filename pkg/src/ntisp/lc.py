"""Layered-Constraints(t, s): satisfiability of a conjunction of ground
[n]-formulas whose non-operator symbols are shared only between
adjacent layers."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import logic
from .errors import ParseError, TooLargeError, ValidationError
from .logic import And, App, Eq, Formula, Not, Num, Or, Rel, conj, disj, nnf

SAT, UNSAT, INVALID = "sat", "unsat", "invalid_certificate"
DEFAULT_CAP = 2 ** 20


def length(f: Formula) -> int:
    return logic.length(f)


def parse_nformula(text: str, line=None) -> Formula:
    return logic.parse_formula(text, line)


def _table_index(args, n):
    idx = 0
    for a in args:
        idx = idx * n + a
    return idx


class PaddedTable:
    """A t-ary table over [N] equal to ``inner`` on [n]^t and 0 elsewhere,
    materialized only on demand."""

    def __init__(self, inner: Sequence[int], n: int, N: int, arity: int):
        self.inner, self.n, self.N, self.arity = inner, n, N, arity

    def __len__(self):
        return self.N ** self.arity

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return [self[i] for i in range(*idx.indices(len(self)))]
        args = []
        for _ in range(self.arity):
            idx, r = divmod(idx, self.N)
            args.append(r)
        args.reverse()
        if any(a >= self.n for a in args):
            return 0
        return self.inner[_table_index(args, self.n)]

    def __iter__(self):
        return (self[i] for i in range(len(self)))


@dataclass
class LcInstance:
    n: int
    t: int
    s: int
    op: dict
    layers: list
    taus: Optional[list] = None  # taus[i-1] = {name: arity} for layer i
    length_factor: int = 1

    @property
    def length_bound(self) -> int:
        return self.length_factor * self.n ** self.s

    def op_value(self, name, args):
        return self.op[name][_table_index(args, self.n)]

    def symbols(self) -> dict:
        out = {}
        for f in self.layers:
            for k, v in logic.symbols_used(f).items():
                if k not in self.op:
                    out[k] = v
        return out

    def size(self) -> int:
        return sum(len(tab) for tab in self.op.values()) + sum(length(f) for f in self.layers)


@dataclass(frozen=True)
class LcViolation:
    message: str
    where: tuple = ()

    def __str__(self):
        return self.message


def _layer_symbols(inst, f):
    return {k: v for k, v in logic.symbols_used(f).items() if k not in inst.op}


def validate_instance(inst: LcInstance) -> list[LcViolation]:
    out = []
    if not inst.op:
        out.append(LcViolation("operator set is empty"))
    if not inst.t >= inst.s >= 1:
        out.append(LcViolation("need t >= s >= 1"))
    for name, tab in inst.op.items():
        if len(tab) != inst.n ** inst.t:
            out.append(LcViolation(f"operator {name} has {len(tab)} entries, expected {inst.n ** inst.t}"))
        elif not isinstance(tab, PaddedTable) and any(not 0 <= v < inst.n for v in tab):
            out.append(LcViolation(f"operator {name} has a value outside [{inst.n}]"))
    used = []
    for i, f in enumerate(inst.layers, 1):
        if length(f) > inst.length_bound:
            bound = "n^s" if inst.length_factor == 1 else f"{inst.length_factor}*n^s"
            out.append(LcViolation(f"layer {i} exceeds {bound}", (i,)))
        for a in logic.atoms(f):
            if isinstance(a, Rel):
                out.append(LcViolation(f"layer {i} uses relation atom {a}", (i,)))
        for term in logic.all_terms(f):
            if isinstance(term, Num) and term.value >= inst.n:
                out.append(LcViolation(f"layer {i} integer {term.value} outside [{inst.n}]", (i,)))
            elif not isinstance(term, (Num, App)):
                out.append(LcViolation(f"layer {i} contains non-ground term {term}", (i,)))
            elif isinstance(term, App) and term.name in inst.op and len(term.args) != inst.t:
                out.append(LcViolation(f"layer {i} applies operator {term.name} with wrong arity", (i,)))
        syms = _layer_symbols(inst, f)
        used.append(syms)
        if inst.taus is not None:
            allowed = dict(inst.taus[i - 1]) if i - 1 < len(inst.taus) else {}
            if i >= 2 and i - 2 < len(inst.taus):
                allowed.update(inst.taus[i - 2])
            for name, ar in syms.items():
                if allowed.get(name) != ar:
                    out.append(LcViolation(f"layer {i} uses {name}/{ar} outside tau_{i - 1} and tau_{i}", (i,)))
    arities = {}
    for i, syms in enumerate(used, 1):
        for name, ar in syms.items():
            if arities.setdefault(name, ar) != ar:
                out.append(LcViolation(f"symbol {name} used with two arities", (i,)))
    for i in range(len(used)):
        for j in range(i + 2, len(used)):
            for name in sorted(set(used[i]) & set(used[j])):
                out.append(LcViolation(f"({i + 1},{j + 1}) share {name}", (i + 1, j + 1)))
    return out


# ----------------------------------------------------------- certificates

@dataclass
class LayerCertificate:
    choices: list = field(default_factory=list)  # disjunct index per visited Or node
    values: list = field(default_factory=list)   # (name, args, value) per application


@dataclass
class LcCertificate:
    layers: list

    def dump(self) -> str:
        lines = []
        for i, lc in enumerate(self.layers, 1):
            lines.append(f"layer {i}")
            if lc.choices:
                lines.append("choose " + " ".join(map(str, lc.choices)))
            for name, args, v in lc.values:
                lines.append(f"{name}({','.join(map(str, args))})={v}")
        return "\n".join(lines) + "\n"


def load_certificate(text: str, source=None) -> LcCertificate:
    layers = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("layer"):
            layers.append(LayerCertificate())
            continue
        if not layers:
            raise ParseError("entry before the first 'layer' line", no, source)
        try:
            if line.startswith("choose"):
                layers[-1].choices.extend(int(tok) for tok in line.split()[1:])
                continue
            lhs, v = line.split("=")
            t = logic.parse_term(lhs)
            if not isinstance(t, App) or not all(isinstance(a, Num) for a in t.args):
                raise ValueError
            layers[-1].values.append((t.name, tuple(a.value for a in t.args), int(v)))
        except (ValueError, ParseError):
            raise ParseError(f"bad certificate line {line!r}", no, source) from None
    return LcCertificate(layers)


@dataclass
class SolveResult:
    verdict: str
    peak_live: int = 0
    comparisons: int = 0
    assignment: Optional[dict] = None
    certificate: Optional[LcCertificate] = None
    reason: str = ""
    reads: list = field(default_factory=list)


class _BadCert(Exception):
    pass


class _Refuted(Exception):
    pass


def _verify_layer(inst, f, lc: LayerCertificate):
    """Walk one layer under its certificate; return the assignment list."""
    choices = iter(lc.choices)
    values = iter(lc.values)
    triples = []

    def ev(term):
        if isinstance(term, Num):
            return term.value
        args = tuple(ev(a) for a in term.args)
        if term.name in inst.op:
            return inst.op_value(term.name, args)
        try:
            name, cargs, v = next(values)
        except StopIteration:
            raise _BadCert(f"certificate has no value for {term.name}{args}") from None
        if name != term.name or tuple(cargs) != args:
            raise _BadCert(f"certificate gives {name}{tuple(cargs)}, formula needs {term.name}{args}")
        if not 0 <= v < inst.n:
            raise _BadCert(f"value {v} outside [{inst.n}]")
        triples.append((name, args, v))
        return v

    def walk(g):
        if isinstance(g, Eq):
            if ev(g.left) != ev(g.right):
                raise _Refuted(f"atom {g} is false")
        elif isinstance(g, Not):
            a = g.arg
            if ev(a.left) == ev(a.right):
                raise _Refuted(f"atom {a} is true")
        elif isinstance(g, And):
            for h in g.items:
                walk(h)
        else:
            try:
                k = next(choices)
            except StopIteration:
                raise _BadCert("certificate has no choice for a disjunction") from None
            if not 0 <= k < len(g.items):
                raise _BadCert(f"choice {k} out of range for a {len(g.items)}-way disjunction")
            walk(g.items[k])

    walk(nnf(f))
    if next(choices, None) is not None or next(values, None) is not None:
        raise _BadCert("certificate has unused entries")
    return triples


def _sorted_consistent(triples, stats):
    """Sort by (symbol, args) and collapse duplicates; None on a clash."""
    ordered = sorted(triples, key=lambda e: (e[0], e[1]))
    stats[0] += max(0, len(ordered) - 1)
    out = []
    for e in ordered:
        if out and out[-1][:2] == e[:2]:
            if out[-1][2] != e[2]:
                return None, e
            continue
        out.append(e)
    return out, None


def _merge_check(prev, cur, stats, hits=None):
    i = j = 0
    while i < len(prev) and j < len(cur):
        stats[0] += 1
        a, b = prev[i][:2], cur[j][:2]
        if a == b:
            if hits is not None:
                hits.add(a[0])
            if prev[i][2] != cur[j][2]:
                return cur[j]
            i += 1
            j += 1
        elif a < b:
            i += 1
        else:
            j += 1
    return None


def solve_stream(inst: LcInstance, cert: Optional[LcCertificate] = None,
                 search: bool = False, record_reads: bool = False) -> SolveResult:
    """Layer-by-layer check keeping only the previous layer's bindings."""
    if (cert is None) == (not search):
        raise ValidationError("give exactly one of cert or search")
    bad = validate_instance(inst)
    if bad:
        raise ValidationError("invalid instance: " + "; ".join(map(str, bad[:5])))
    if search:
        return _search(inst)
    if len(cert.layers) != len(inst.layers):
        return SolveResult(INVALID, reason="certificate layer count differs")
    stats = [0]
    prev: list = []
    peak = 0
    reads = []
    for i, (f, lc) in enumerate(zip(inst.layers, cert.layers), 1):
        try:
            triples = _verify_layer(inst, f, lc)
        except _BadCert as exc:
            return SolveResult(INVALID, peak, stats[0], reason=f"layer {i}: {exc}")
        except _Refuted as exc:
            return SolveResult(UNSAT, peak, stats[0], reason=f"layer {i}: {exc}")
        peak = max(peak, len(triples) + len(prev))
        cur, clash = _sorted_consistent(triples, stats)
        if cur is None:
            return SolveResult(UNSAT, peak, stats[0], reason=f"layer {i}: inconsistent values for {clash[0]}{clash[1]}")
        hits = set() if record_reads else None
        clash = _merge_check(prev, cur, stats, hits)
        if record_reads:
            # (layer, symbols retained from layer i-1, symbols consulted)
            reads.append((i, {e[0] for e in prev}, hits))
        if clash is not None:
            return SolveResult(UNSAT, peak, stats[0], reason=f"layer {i}: disagrees with layer {i - 1} on {clash[0]}{clash[1]}")
        # Bindings of layer i-1 can no longer meet a later layer.
        prev = cur
    return SolveResult(SAT, peak, stats[0], reads=reads)


# ------------------------------------------------------------------ search

def _layer_solutions(inst, f, fixed: dict):
    """All assignments extending ``fixed`` on this layer's applications
    that make the layer true, as dicts of the newly bound entries plus
    the reused ones. Duplicates are removed."""
    n = inst.n
    seen = set()

    def ev(term, env, target=None):
        # yields (value, env)
        if isinstance(term, Num):
            yield term.value, env
            return
        for args, env2 in ev_args(term.args, env):
            if term.name in inst.op:
                yield inst.op_value(term.name, args), env2
                continue
            key = (term.name, args)
            if key in env2:
                yield env2[key], env2
            elif key in fixed:
                yield fixed[key], {**env2, key: fixed[key]}
            elif target is not None:
                yield target, {**env2, key: target}
            else:
                for v in range(n):
                    yield v, {**env2, key: v}

    def ev_args(args, env):
        if not args:
            yield (), env
            return
        for v, env2 in ev(args[0], env):
            for rest, env3 in ev_args(args[1:], env2):
                yield (v,) + rest, env3

    def walk(g, env):
        if isinstance(g, Eq):
            for rv, env2 in ev(g.right, env):
                for lv, env3 in ev(g.left, env2, target=rv):
                    if lv == rv:
                        yield env3
        elif isinstance(g, Not):
            a = g.arg
            for rv, env2 in ev(a.right, env):
                for lv, env3 in ev(a.left, env2):
                    if lv != rv:
                        yield env3
        elif isinstance(g, And):
            yield from walk_all(g.items, env)
        else:
            for h in g.items:
                yield from walk(h, env)

    def walk_all(items, env):
        if not items:
            yield env
            return
        for env2 in walk(items[0], env):
            yield from walk_all(items[1:], env2)

    for env in walk(nnf(f), {}):
        key = frozenset(env.items())
        if key not in seen:
            seen.add(key)
            yield env


def _search(inst: LcInstance) -> SolveResult:
    failed = set()
    peak = [0]
    layers = inst.layers

    names = [set(_layer_symbols(inst, f)) for f in layers]

    def dfs(i, prev: dict):
        if i == len(layers):
            return {}
        # Only the previous layer's bindings of symbols that layer i uses
        # constrain it, so failures are remembered on exactly those.
        shared = {k: v for k, v in prev.items() if k[0] in names[i]}
        key = (i, frozenset(shared.items()))
        if key in failed:
            return None
        for env in _layer_solutions(inst, layers[i], shared):
            peak[0] = max(peak[0], len(env) + len(prev))
            rest = dfs(i + 1, env)
            if rest is not None:
                return {**env, **rest}
        failed.add(key)
        return None

    found = dfs(0, {})
    if found is None:
        return SolveResult(UNSAT, peak[0])
    return SolveResult(SAT, peak[0], assignment=found,
                       certificate=certificate_from_assignment(inst, found))


def _total(assignment):
    return lambda key: assignment.get(key, 0)


def eval_nformula(inst: LcInstance, f: Formula, value) -> bool:
    def ev(term):
        if isinstance(term, Num):
            return term.value
        args = tuple(ev(a) for a in term.args)
        if term.name in inst.op:
            return inst.op_value(term.name, args)
        return value((term.name, args))

    def walk(g):
        if isinstance(g, Eq):
            return ev(g.left) == ev(g.right)
        if isinstance(g, Not):
            return not walk(g.arg)
        if isinstance(g, And):
            return all(walk(h) for h in g.items)
        return any(walk(h) for h in g.items)
    return walk(f)


def certificate_from_assignment(inst: LcInstance, assignment: dict) -> LcCertificate:
    """Certificate for a satisfying assignment (unbound entries read as 0):
    each disjunction picks its first true disjunct."""
    value = _total(assignment)
    out = []
    for f in inst.layers:
        lc = LayerCertificate()

        def ev(term):
            if isinstance(term, Num):
                return term.value
            args = tuple(ev(a) for a in term.args)
            if term.name in inst.op:
                return inst.op_value(term.name, args)
            v = value((term.name, args))
            lc.values.append((term.name, args, v))
            return v

        def walk(g):
            if isinstance(g, Eq):
                ev(g.left), ev(g.right)
            elif isinstance(g, Not):
                ev(g.arg.left), ev(g.arg.right)
            elif isinstance(g, And):
                for h in g.items:
                    walk(h)
            else:
                for k, h in enumerate(g.items):
                    if eval_nformula(inst, h, value):
                        lc.choices.append(k)
                        walk(h)
                        return
                raise ValidationError("assignment does not satisfy the layer")

        walk(nnf(f))
        out.append(lc)
    return LcCertificate(out)


# ------------------------------------------------------------ brute force

def solve_brute(inst: LcInstance, cap: int = DEFAULT_CAP) -> SolveResult:
    """Enumerate total interpretations of every non-operator symbol.

    Symbols are fixed in order of first use, and a layer is evaluated as
    soon as all of its symbols are fixed, so a failing layer prunes every
    extension of the current prefix. The space enumerated is the same.
    """
    syms = sorted(inst.symbols().items())
    n = inst.n
    entries = [(name, args) for name, ar in syms for args in itertools.product(range(n), repeat=ar)]
    if n ** len(entries) > cap:
        raise TooLargeError("too large for oracle")
    first = {}
    for i, f in enumerate(inst.layers):
        for name in _layer_symbols(inst, f):
            first.setdefault(name, i)
    entries.sort(key=lambda e: (first[e[0]], e))
    # ready[k]: layers whose symbols are all fixed once entries[:k] are
    last_entry = {}
    for k, (name, _) in enumerate(entries):
        last_entry[name] = k + 1
    ready = [[] for _ in range(len(entries) + 1)]
    for i, f in enumerate(inst.layers):
        ready[max((last_entry[nm] for nm in _layer_symbols(inst, f)), default=0)].append(f)
    assignment = {}
    value = assignment.__getitem__

    def extend(k):
        if not all(eval_nformula(inst, f, value) for f in ready[k]):
            return False
        if k == len(entries):
            return True
        for v in range(n):
            assignment[entries[k]] = v
            if extend(k + 1):
                return True
        del assignment[entries[k]]
        return False

    if extend(0):
        return SolveResult(SAT, assignment=dict(assignment))
    return SolveResult(UNSAT)


class SatEncoding:
    """CNF encoding of an instance with one-hot values over [n]. Built once,
    it can be solved repeatedly under different fixed entries, which is how
    one encoding serves many input tables given as plain symbols."""

    def __init__(self, inst: LcInstance, solver: str = "g4"):
        from pysat.formula import IDPool
        from pysat.solvers import Solver

        self.inst = inst
        n = inst.n
        pool = IDPool()
        clauses = []
        entry_var = self.entry_var = {}

        def one_hot(prefix):
            vs = [pool.id((prefix, v)) for v in range(n)]
            clauses.append(vs)
            for a, b in itertools.combinations(vs, 2):
                clauses.append([-a, -b])
            return vs

        def entry(key):
            if key not in entry_var:
                entry_var[key] = one_hot(("e", key))
            return entry_var[key]

        const_cache = {}
        known = {}           # term -> its value when fixed by constants alone
        term_cache = {}
        counter = itertools.count()

        def const(v):
            if v not in const_cache:
                vs = one_hot(("c", v))
                clauses.append([vs[v]])
                const_cache[v] = vs
            return const_cache[v]

        def term(t):
            """One-hot literal list for a term node; shared subterms are
            encoded once and constant subterms are folded."""
            if t in term_cache:
                return term_cache[t]
            if isinstance(t, Num):
                known[t] = t.value
                out = const(t.value)
            else:
                subs = [term(a) for a in t.args]
                vals = [known.get(a) for a in t.args]
                if all(v is not None for v in vals):
                    if t.name in inst.op:
                        known[t] = inst.op_value(t.name, tuple(vals))
                        out = const(known[t])
                    else:
                        out = entry((t.name, tuple(vals)))
                else:
                    out = one_hot(("t", next(counter)))
                    for combo in itertools.product(range(n), repeat=len(subs)):
                        if any(vals[k] is not None and vals[k] != v for k, v in enumerate(combo)):
                            continue
                        guard = [-subs[k][v] for k, v in enumerate(combo) if vals[k] is None]
                        if t.name in inst.op:
                            clauses.append(guard + [out[inst.op_value(t.name, combo)]])
                        else:
                            ev = entry((t.name, combo))
                            for v in range(n):
                                clauses.append(guard + [-ev[v], out[v]])
            term_cache[t] = out
            return out

        def require(g, guard):
            """Clauses for guard -> g, g in negation normal form. guard is a
            literal or None for unconditional."""
            pre = [] if guard is None else [-guard]
            neg = isinstance(g, Not)
            if neg or isinstance(g, Eq):
                atom = g.arg if neg else g
                a, b = term(atom.left), term(atom.right)
                ka, kb = known.get(atom.left), known.get(atom.right)
                if ka is not None and kb is not None:
                    if (ka == kb) == neg:
                        clauses.append(pre)  # the guard must be false
                    return
                if ka is not None or kb is not None:
                    side, v = (b, ka) if ka is not None else (a, kb)
                    clauses.append(pre + [-side[v] if neg else side[v]])
                    return
                for v in range(n):
                    if neg:
                        clauses.append(pre + [-a[v], -b[v]])
                    else:
                        clauses.append(pre + [-a[v], b[v]])
                        clauses.append(pre + [a[v], -b[v]])
                return
            if isinstance(g, And):
                for h in g.items:
                    require(h, guard)
                return
            lits = []
            for h in g.items:
                lit = pool.id(("f", next(counter)))
                require(h, lit)
                lits.append(lit)
            clauses.append(pre + lits)

        for name in inst.op:
            for args in itertools.product(range(n), repeat=inst.t):
                if not 0 <= inst.op_value(name, args) < n:
                    raise ValidationError("operator value outside [n]")
        for f in inst.layers:
            require(nnf(f), None)
        self.solver = Solver(name=solver, bootstrap_with=clauses)
        self.clause_count = len(clauses)

    def solve(self, fixed: Optional[dict] = None) -> SolveResult:
        """fixed maps (symbol, args) to a value; entries the layers never
        mention are ignored."""
        assumptions = []
        for key, v in (fixed or {}).items():
            if key in self.entry_var:
                if not 0 <= v < self.inst.n:
                    return SolveResult(UNSAT, reason=f"fixed value {v} outside [{self.inst.n}]")
                assumptions.append(self.entry_var[key][v])
        if not self.solver.solve(assumptions=assumptions):
            return SolveResult(UNSAT)
        model = set(x for x in self.solver.get_model() if x > 0)
        n = self.inst.n
        assignment = {key: next(v for v in range(n) if vs[v] in model)
                      for key, vs in self.entry_var.items()}
        return SolveResult(SAT, assignment=assignment)

    def close(self):
        self.solver.delete()


def solve_sat(inst: LcInstance) -> SolveResult:
    """Complete decision through the CNF encoding."""
    enc = SatEncoding(inst)
    try:
        return enc.solve()
    finally:
        enc.close()


# ------------------------------------------------------------- generator

def random_instance(rng: random.Random, n: int = 3, t: int = 2, s: int = 1, l: int = 3,
                    atoms_per_layer: int = 2, or_density: float = 0.3,
                    symbols_per_layer: int = 1, length_factor: Optional[int] = None,
                    neg_density: float = 0.15) -> LcInstance:
    """Seeded random instance; layer i uses fresh symbols f<i>_<j> of
    arity <= t plus the symbols of layer i-1."""
    ops = {"op0": tuple(rng.randrange(n) for _ in range(n ** t))}
    taus = []
    for i in range(1, l + 1):
        taus.append({f"f{i}_{j}": rng.randint(1, s) for j in range(symbols_per_layer)})

    def rterm(pool, depth):
        r = rng.random()
        if depth == 0 or r < 0.35:
            return Num(rng.randrange(n))
        if r < 0.5:
            return App("op0", tuple(rterm(pool, depth - 1) for _ in range(t)))
        name, ar = rng.choice(pool)
        return App(name, tuple(rterm(pool, depth - 1) for _ in range(ar)))

    def ratom(pool):
        a = Eq(rterm(pool, 2), rterm(pool, 2))
        return Not(a) if rng.random() < neg_density else a

    layers = []
    for i in range(l):
        pool = list(taus[i].items()) + (list(taus[i - 1].items()) if i else [])
        items = []
        for _ in range(atoms_per_layer):
            if rng.random() < or_density:
                items.append(disj(ratom(pool), ratom(pool)))
            else:
                items.append(ratom(pool))
        layers.append(conj(*items) if len(items) > 1 else items[0])
    need = max(length(f) for f in layers) if layers else 1
    factor = length_factor or max(1, -(-need // n ** s))
    return LcInstance(n, t, s, ops, layers, taus, factor)


def chain_instance(l: int, n: int = 2) -> LcInstance:
    """F_1 = f1(0)=f1(1) and F_i = f<i>(0)=f<i-1>(0) for i > 1."""
    layers = [Eq(App("f1", (Num(0),)), App("f1", (Num(1),)))]
    for i in range(2, l + 1):
        layers.append(Eq(App(f"f{i}", (Num(0),)), App(f"f{i - 1}", (Num(0),))))
    taus = [{f"f{i}": 1} for i in range(1, l + 1)]
    add = tuple((a + b) % n for a in range(n) for b in range(n))
    return LcInstance(n, 2, 1, {"op": add}, layers, taus, length_factor=-(-5 // n))


# ------------------------------------------------------------ file format

def serialize(inst: LcInstance) -> str:
    head = f"lcinstance n={inst.n} t={inst.t} s={inst.s}"
    if inst.length_factor != 1:
        head += f" k={inst.length_factor}"
    lines = [head]
    for name, tab in inst.op.items():
        lines.append(f"op {name}")
        lines.append(" ".join(map(str, tab)))
    if inst.taus is not None:
        for i, tau in enumerate(inst.taus, 1):
            decl = " ".join(f"{k}/{v}" for k, v in tau.items())
            lines.append(f"tau {i}: {decl}".rstrip())
    for i, f in enumerate(inst.layers, 1):
        lines.append(f"layer {i}: {f}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def load_instance(text: str, source=None) -> LcInstance:
    lines = [(no, raw.split("#", 1)[0].strip()) for no, raw in enumerate(text.splitlines(), 1)]
    lines = [(no, ln) for no, ln in lines if ln]
    if not lines or not lines[0][1].startswith("lcinstance"):
        raise ParseError("expected 'lcinstance n=<int> t=<int> s=<int>' header",
                         lines[0][0] if lines else None, source)
    try:
        params = dict(kv.split("=") for kv in lines[0][1].split()[1:])
        n, t, s = int(params["n"]), int(params["t"]), int(params["s"])
        k = int(params.get("k", 1))
    except (ValueError, KeyError):
        raise ParseError("bad header", lines[0][0], source) from None
    op, taus, layers = {}, {}, {}
    i = 1
    ended = False
    while i < len(lines):
        no, ln = lines[i]
        if ln == "end":
            ended = True
            break
        if ln.startswith("op "):
            name = ln.split()[1]
            entries = []
            i += 1
            while len(entries) < n ** t:
                if i >= len(lines):
                    raise ParseError(f"operator {name} truncated", no, source)
                tno, tl = lines[i]
                try:
                    entries.extend(int(x) for x in tl.split())
                except ValueError:
                    raise ParseError(f"non-integer operator entry in {tl!r}", tno, source) from None
                i += 1
            if len(entries) != n ** t:
                raise ParseError(f"operator {name} has {len(entries)} entries, expected {n ** t}", no, source)
            op[name] = tuple(entries)
            continue
        if ln.startswith("tau"):
            head, _, decls = ln.partition(":")
            try:
                idx = int(head.split()[1])
                taus[idx] = {d.split("/")[0]: int(d.split("/")[1]) for d in decls.split()}
            except (ValueError, IndexError):
                raise ParseError(f"bad tau line {ln!r}", no, source) from None
        elif ln.startswith("layer"):
            head, _, body = ln.partition(":")
            try:
                idx = int(head.split()[1])
            except (ValueError, IndexError):
                raise ParseError(f"bad layer line {ln!r}", no, source) from None
            try:
                layers[idx] = logic.parse_formula(body, no)
            except ParseError as exc:
                raise ParseError(exc.message, no, source) from None
        else:
            raise ParseError(f"unexpected line {ln!r}", no, source)
        i += 1
    if not ended:
        raise ParseError("missing 'end'", lines[-1][0], source)
    if sorted(layers) != list(range(1, len(layers) + 1)):
        raise ParseError("layers must be numbered 1..l", None, source)
    tau_list = None
    if taus:
        tau_list = [taus.get(j, {}) for j in range(1, max(max(taus), len(layers)) + 1)]
    return LcInstance(n, t, s, op, [layers[j] for j in sorted(layers)], tau_list, k)
