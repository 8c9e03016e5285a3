"""Terms and quantifier-free formulas shared by the ESO checkers, the
compiler and the ground formulas of Layered-Constraints instances.

Text syntax::

    term    := 0 | <int> | x1 | y1 | succ(term) | name(term, ...)
    atom    := term = term | term != term | name(term, ...) | true | false
    formula := atom | ~formula | formula & formula | formula | formula
               | formula -> formula | (formula)

``&`` binds tighter than ``|``, which binds tighter than ``->``.
An integer literal ``k`` denotes ``succ^k(0)`` and saturates at n-1.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Optional, Sequence, Union

from .errors import ParseError


# ------------------------------------------------------------------- terms

@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Num:
    value: int

    def __str__(self):
        return str(self.value)


ZERO = Num(0)


@dataclass(frozen=True)
class Succ:
    arg: "Term"

    def __str__(self):
        return f"succ({self.arg})"


@dataclass(frozen=True)
class SuccVec:
    """Component ``index`` of the lexicographic successor of a tuple of terms."""
    index: int
    args: tuple

    def __str__(self):
        return f"succv({self.index},{','.join(map(str, self.args))})"


@dataclass(frozen=True)
class App:
    name: str
    args: tuple = ()

    def __str__(self):
        if not self.args:
            return self.name
        return f"{self.name}({','.join(map(str, self.args))})"


Term = Union[Var, Num, Succ, SuccVec, App]


# ---------------------------------------------------------------- formulas

@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term

    def __str__(self):
        return f"{self.left}={self.right}"


@dataclass(frozen=True)
class Rel:
    """Relation atom name(args)."""
    name: str
    args: tuple = ()

    def __str__(self):
        return str(App(self.name, self.args)) if self.args else f"{self.name}()"


@dataclass(frozen=True)
class Not:
    arg: "Formula"

    def __str__(self):
        if isinstance(self.arg, Eq):
            return f"{self.arg.left}!={self.arg.right}"
        return f"~{_wrap(self.arg)}"


@dataclass(frozen=True)
class And:
    items: tuple = ()

    def __str__(self):
        if not self.items:
            return "true"
        return " & ".join(_wrap(f, (Or,)) for f in self.items)


@dataclass(frozen=True)
class Or:
    items: tuple = ()

    def __str__(self):
        if not self.items:
            return "false"
        return " | ".join(_wrap(f, (And,)) for f in self.items)


Formula = Union[Eq, Rel, Not, And, Or]
TRUE = And(())
FALSE = Or(())


def _wrap(f, loose=(And, Or)):
    s = str(f)
    if isinstance(f, loose) and len(f.items) > 1:
        return f"({s})"
    return s


def conj(*items: Formula) -> Formula:
    out = []
    for f in items:
        if isinstance(f, And):
            out.extend(f.items)
        elif f == FALSE:
            return FALSE
        else:
            out.append(f)
    return out[0] if len(out) == 1 else And(tuple(out))


def disj(*items: Formula) -> Formula:
    out = []
    for f in items:
        if isinstance(f, Or):
            out.extend(f.items)
        elif f == TRUE:
            return TRUE
        else:
            out.append(f)
    return out[0] if len(out) == 1 else Or(tuple(out))


def neg(f: Formula) -> Formula:
    if isinstance(f, Not):
        return f.arg
    if f == TRUE:
        return FALSE
    if f == FALSE:
        return TRUE
    return Not(f)


def implies(a: Formula, b: Formula) -> Formula:
    return disj(neg(a), b)


def eq(a: Term, b: Term) -> Eq:
    return Eq(a, b)


def neq(a: Term, b: Term) -> Formula:
    return Not(Eq(a, b))


def succ_n(t: Term, k: int) -> Term:
    for _ in range(k):
        t = Succ(t)
    return t


# --------------------------------------------------------------- traversal

def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, Succ):
        yield from subterms(t.arg)
    elif isinstance(t, (App, SuccVec)):
        for a in t.args:
            yield from subterms(a)


def atoms(f: Formula) -> Iterator[Formula]:
    if isinstance(f, (Eq, Rel)):
        yield f
    elif isinstance(f, Not):
        yield from atoms(f.arg)
    else:
        for g in f.items:
            yield from atoms(g)


def atom_terms(a) -> tuple:
    return (a.left, a.right) if isinstance(a, Eq) else a.args


def all_terms(f: Formula) -> Iterator[Term]:
    for a in atoms(f):
        for t in atom_terms(a):
            yield from subterms(t)


def symbols_used(f: Formula) -> dict[str, int]:
    """Map of applied symbol names (functions and relations) to arities."""
    out: dict[str, int] = {}
    for a in atoms(f):
        if isinstance(a, Rel):
            out[a.name] = len(a.args)
    for t in all_terms(f):
        if isinstance(t, App):
            out[t.name] = len(t.args)
    return out


def map_terms(f: Formula, fn: Callable[[Term], Term]) -> Formula:
    """Rebuild f applying fn bottom-up to every term."""
    def mt(t):
        if isinstance(t, Succ):
            t = Succ(mt(t.arg))
        elif isinstance(t, SuccVec):
            t = SuccVec(t.index, tuple(mt(a) for a in t.args))
        elif isinstance(t, App):
            t = App(t.name, tuple(mt(a) for a in t.args))
        return fn(t)

    def mf(g):
        if isinstance(g, Eq):
            return Eq(mt(g.left), mt(g.right))
        if isinstance(g, Rel):
            return Rel(g.name, tuple(mt(a) for a in g.args))
        if isinstance(g, Not):
            return Not(mf(g.arg))
        return type(g)(tuple(mf(h) for h in g.items))
    return mf(f)


def substitute(f: Formula, values: Mapping[str, Term]) -> Formula:
    return map_terms(f, lambda t: values.get(t.name, t) if isinstance(t, Var) else t)


def nnf(f: Formula, negate: bool = False) -> Formula:
    """Negation normal form: negations only directly above atoms."""
    if isinstance(f, Not):
        return nnf(f.arg, not negate)
    if isinstance(f, (Eq, Rel)):
        return Not(f) if negate else f
    parts = tuple(nnf(g, negate) for g in f.items)
    if isinstance(f, And) != negate:
        return conj(*parts) if parts else TRUE
    return disj(*parts) if parts else FALSE


def length(f: Formula) -> int:
    """Occurrences of integers, symbols, equalities and connectives.

    An n-ary conjunction or disjunction counts as n-1 binary connectives;
    ``succ`` counts as a symbol and variables as integers.
    """
    def tl(t):
        if isinstance(t, (Num, Var)):
            return 1
        if isinstance(t, Succ):
            return 1 + tl(t.arg)
        return 1 + sum(tl(a) for a in t.args)  # App and SuccVec

    if isinstance(f, Eq):
        return 1 + tl(f.left) + tl(f.right)
    if isinstance(f, Rel):
        return 1 + sum(tl(a) for a in f.args)
    if isinstance(f, Not):
        return 1 + length(f.arg)
    if not f.items:
        return 0
    return len(f.items) - 1 + sum(length(g) for g in f.items)


# ----------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(->)|(!=)|(\d+)|([A-Za-z_][A-Za-z0-9_']*)|(.))")


def tokenize(text: str, line=None) -> list[str]:
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        tok = m.group(m.lastindex)
        if tok.strip() == "":
            break
        if m.lastindex == 5 and tok not in "()=,~&|:/":
            raise ParseError(f"unexpected character {tok!r}", line)
        toks.append(tok)
        pos = m.end()
    return toks


class _Parser:
    def __init__(self, tokens, line=None, relations=frozenset()):
        self.toks = tokens
        self.i = 0
        self.line = line
        self.relations = relations

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None:
            raise ParseError(f"unexpected end of input, expected {expected or 'more'}", self.line)
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, got {tok!r}", self.line)
        self.i += 1
        return tok

    def formula(self):
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return implies(left, self.formula())
        return left

    def disjunction(self):
        items = [self.conjunction()]
        while self.peek() == "|":
            self.take()
            items.append(self.conjunction())
        return items[0] if len(items) == 1 else disj(*items)

    def conjunction(self):
        items = [self.unary()]
        while self.peek() == "&":
            self.take()
            items.append(self.unary())
        return items[0] if len(items) == 1 else conj(*items)

    def unary(self):
        tok = self.peek()
        if tok == "~":
            self.take()
            return Not(self.unary())
        if tok == "(":
            # Either a parenthesized formula, or the start of nothing else:
            # terms never start with "(".
            self.take()
            f = self.formula()
            self.take(")")
            return f
        if tok == "true":
            self.take()
            return TRUE
        if tok == "false":
            self.take()
            return FALSE
        return self.atom()

    def atom(self):
        left = self.term()
        tok = self.peek()
        if tok == "=":
            self.take()
            return Eq(left, self.term())
        if tok == "!=":
            self.take()
            return Not(Eq(left, self.term()))
        if isinstance(left, App):
            return Rel(left.name, left.args)
        raise ParseError(f"expected '=' after term {left}", self.line)

    def term(self):
        if self.peek() is None:
            raise ParseError("unexpected end of input, expected a term", self.line)
        tok = self.take()
        if tok.isdigit():
            return Num(int(tok))
        if not re.match(r"[A-Za-z_]", tok):
            raise ParseError(f"unexpected {tok!r} where a term was expected", self.line)
        if re.fullmatch(r"[xy]\d+", tok):
            return Var(tok)
        args = []
        if self.peek() == "(":
            self.take()
            if self.peek() == ")" and tok != "succ":
                self.take()
                return App(tok, ())
            args.append(self.term())
            while self.peek() == ",":
                self.take()
                args.append(self.term())
            self.take(")")
        if tok == "succv":
            if len(args) < 2 or not isinstance(args[0], Num):
                raise ParseError("succv takes an index and at least one term", self.line)
            if args[0].value >= len(args) - 1:
                raise ParseError("succv index out of range", self.line)
            return SuccVec(args[0].value, tuple(args[1:]))
        if tok == "succ":
            if len(args) != 1:
                raise ParseError("succ takes one argument", self.line)
            return Succ(args[0])
        return App(tok, tuple(args))


def parse_formula(text: str, line=None) -> Formula:
    p = _Parser(tokenize(text, line), line)
    f = p.formula()
    if p.peek() is not None:
        raise ParseError(f"trailing input starting at {p.peek()!r}", line)
    return f


def parse_term(text: str, line=None) -> Term:
    p = _Parser(tokenize(text, line), line)
    t = p.term()
    if p.peek() is not None:
        raise ParseError(f"trailing input starting at {p.peek()!r}", line)
    return t


# -------------------------------------------------------------- evaluation

class Interpretation:
    """Tables for every applied symbol over one domain [n].

    ``tables`` maps a name to ``(arity, flat_table)``; relation tables hold 0/1.
    """

    def __init__(self, n: int, tables: Mapping[str, tuple]):
        self.n = n
        self.tables = dict(tables)

    def apply(self, name: str, args: Sequence[int]) -> int:
        arity, table = self.tables[name]
        idx = 0
        for a in args:
            idx = idx * self.n + a
        return table[idx]


def eval_term(t: Term, interp: Interpretation, env: Mapping[str, int]) -> int:
    n = interp.n
    if isinstance(t, Var):
        return env[t.name]
    if isinstance(t, Num):
        return min(t.value, n - 1)
    if isinstance(t, Succ):
        v = eval_term(t.arg, interp, env)
        return v + 1 if v < n - 1 else n - 1
    if isinstance(t, SuccVec):
        return succ_delta([eval_term(a, interp, env) for a in t.args], n)[t.index]
    return interp.apply(t.name, [eval_term(a, interp, env) for a in t.args])


def evaluate(f: Formula, interp: Interpretation, env: Mapping[str, int]) -> bool:
    """Reference interpreter (slow, used as an independent check)."""
    if isinstance(f, Eq):
        return eval_term(f.left, interp, env) == eval_term(f.right, interp, env)
    if isinstance(f, Rel):
        return interp.apply(f.name, [eval_term(a, interp, env) for a in f.args]) == 1
    if isinstance(f, Not):
        return not evaluate(f.arg, interp, env)
    if isinstance(f, And):
        return all(evaluate(g, interp, env) for g in f.items)
    return any(evaluate(g, interp, env) for g in f.items)


def succ_delta(values: Sequence[int], n: int) -> tuple[int, ...]:
    """Non-cyclic lexicographic successor on [n]^k, first coordinate most
    significant; the last tuple (n-1, ..., n-1) is a fixpoint."""
    vals = list(values)
    for i in range(len(vals) - 1, -1, -1):
        if vals[i] < n - 1:
            vals[i] += 1
            for j in range(i + 1, len(vals)):
                vals[j] = 0
            return tuple(vals)
    return tuple(vals)


def compile_formula(f: Formula, n: int, variables: Sequence[str]) -> Callable:
    """Compile f into a factory ``make(tables)`` returning ``fn(*values) -> bool``.

    ``tables`` maps symbol names to flat tables indexed lexicographically.
    Falls back to the interpreter when the generated source is too deep.
    """
    names = sorted(symbols_used(f))
    slot = {name: f"T{i}" for i, name in enumerate(names)}
    last = n - 1

    def ct(t):
        if isinstance(t, Var):
            return t.name
        if isinstance(t, Num):
            return str(min(t.value, last))
        if isinstance(t, Succ):
            return f"S({ct(t.arg)})"
        if isinstance(t, SuccVec):
            return f"SV({t.index}, ({','.join(ct(a) for a in t.args)},))"
        return app(t.name, t.args)

    def app(name, args):
        if not args:
            return f"{slot[name]}[0]"
        idx = ct(args[0])
        for a in args[1:]:
            idx = f"({idx})*{n}+{ct(a)}"
        return f"{slot[name]}[{idx}]"

    def cf(g):
        if isinstance(g, Eq):
            return f"({ct(g.left)}=={ct(g.right)})"
        if isinstance(g, Rel):
            return f"({app(g.name, g.args)}==1)"
        if isinstance(g, Not):
            return f"(not {cf(g.arg)})"
        if not g.items:
            return "True" if isinstance(g, And) else "False"
        op = " and " if isinstance(g, And) else " or "
        return "(" + op.join(cf(h) for h in g.items) + ")"

    unpack = "".join(f"    {slot[name]} = tables[{name!r}]\n" for name in names)
    src = (f"def _make(tables):\n{unpack}"
           f"    def _f({', '.join(variables)}):\n        return {cf(f)}\n"
           f"    return _f\n")

    def S(v):
        return v + 1 if v < last else last

    try:
        ns = {"S": S, "SV": lambda i, vals: succ_delta(vals, n)[i]}
        exec(compile(src, "<formula>", "exec"), ns)
        make = ns["_make"]
    except (RecursionError, SyntaxError, MemoryError):
        def make(tables):
            interp = Interpretation(n, {k: (None, v) for k, v in tables.items()})

            def _f(*vals):
                return evaluate(f, interp, dict(zip(variables, vals)))
            return _f
    return make
