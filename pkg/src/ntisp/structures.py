"""Finite structures over an initial segment [n] = {0, ..., n-1}.

Tables are dense and laid out lexicographically with the last argument
varying fastest, so ``index = sum(a_i * n**(k-1-i))``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import ParseError, ValidationError

FUNC = "func"
REL = "rel"


@dataclass(frozen=True)
class Symbol:
    name: str
    kind: str
    arity: int

    def __post_init__(self):
        if self.kind not in (FUNC, REL):
            raise ValidationError(f"unknown symbol kind {self.kind!r}")
        if self.arity < 0:
            raise ValidationError(f"negative arity for {self.name}")

    def __str__(self):
        return f"{self.kind} {self.name}/{self.arity}"


@dataclass(frozen=True)
class Signature:
    symbols: tuple[Symbol, ...] = ()

    def __post_init__(self):
        names = [s.name for s in self.symbols]
        dup = {x for x in names if names.count(x) > 1}
        if dup:
            raise ValidationError(f"duplicate symbol names: {sorted(dup)}")

    @classmethod
    def of(cls, *specs: tuple[str, str, int]) -> "Signature":
        return cls(tuple(Symbol(name, kind, arity) for name, kind, arity in specs))

    def __iter__(self) -> Iterator[Symbol]:
        return iter(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def __contains__(self, name):
        return any(s.name == name for s in self.symbols)

    def __getitem__(self, name: str) -> Symbol:
        for s in self.symbols:
            if s.name == name:
                return s
        raise KeyError(name)

    @property
    def names(self) -> list[str]:
        return [s.name for s in self.symbols]

    @property
    def max_arity(self) -> int:
        return max((s.arity for s in self.symbols), default=0)


def table_index(args: Sequence[int], n: int) -> int:
    idx = 0
    for a in args:
        idx = idx * n + a
    return idx


def all_tuples(n: int, arity: int) -> Iterator[tuple[int, ...]]:
    """Argument tuples of [n]^arity in table order."""
    return itertools.product(range(n), repeat=arity)


@dataclass(frozen=True)
class Structure:
    n: int
    signature: Signature
    tables: dict = field(compare=False)

    def __post_init__(self):
        if self.n < 0:
            raise ValidationError("domain size must be non-negative")
        frozen = {}
        for sym in self.signature:
            if sym.name not in self.tables:
                raise ValidationError(f"missing table for {sym.name}")
            table = tuple(int(v) for v in self.tables[sym.name])
            expected = self.n ** sym.arity
            if len(table) != expected:
                raise ValidationError(
                    f"table for {sym.name} has {len(table)} entries, expected {expected}"
                )
            hi = 2 if sym.kind == REL else self.n
            for v in table:
                if not 0 <= v < hi:
                    if sym.kind == REL:
                        raise ValidationError(f"relation {sym.name} entry {v} is not 0/1")
                    raise ValidationError(f"value out of domain: {sym.name} entry {v} with n={self.n}")
            frozen[sym.name] = table
        extra = set(self.tables) - set(frozen)
        if extra:
            raise ValidationError(f"tables for undeclared symbols: {sorted(extra)}")
        object.__setattr__(self, "tables", frozen)

    def __eq__(self, other):
        if not isinstance(other, Structure):
            return NotImplemented
        return (self.n, self.signature, self.tables) == (other.n, other.signature, other.tables)

    def __hash__(self):
        return hash((self.n, self.signature, tuple(sorted(self.tables.items()))))

    def value(self, name: str, args: Sequence[int] = ()) -> int:
        sym = self.signature[name]
        if len(args) != sym.arity:
            raise ValidationError(f"{name} expects {sym.arity} arguments, got {len(args)}")
        for a in args:
            if not 0 <= a < self.n:
                raise IndexError(f"argument {a} of {name} outside [{self.n}]")
        return self.tables[name][table_index(args, self.n)]

    def __call__(self, name: str, *args: int) -> int:
        return self.value(name, args)

    def size(self) -> int:
        return sum(self.n ** s.arity for s in self.signature)

    def extended(self, symbols: Iterable[tuple[Symbol, Sequence[int]]]) -> "Structure":
        """A copy with extra symbols appended."""
        syms = list(self.signature.symbols)
        tables = dict(self.tables)
        for sym, table in symbols:
            syms.append(sym)
            tables[sym.name] = table
        return Structure(self.n, Signature(tuple(syms)), tables)


def unary_structure(values: Sequence[int], name: str = "f") -> Structure:
    return Structure(len(values), Signature.of((name, FUNC, 1)), {name: tuple(values)})


def order_relation(n: int) -> tuple[int, ...]:
    """Table of the natural strict order on [n]."""
    return tuple(int(a < b) for a, b in all_tuples(n, 2))


def with_order(s: Structure, name: str = "lt") -> Structure:
    """Add the natural order of the domain as a binary relation."""
    return s.extended([(Symbol(name, REL, 2), order_relation(s.n))])


# ---------------------------------------------------------------- file format

def serialize(s: Structure, header: str = "structure") -> str:
    lines = [f"{header} n={s.n}"]
    for sym in s.signature:
        lines.append(f"{sym.kind} {sym.name}/{sym.arity}")
        lines.append(" ".join(str(v) for v in s.tables[sym.name]))
    lines.append("end")
    return "\n".join(lines) + "\n"


def _meaningful_lines(text: str):
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


def _parse_decl(line, no, source):
    try:
        kind, rest = line.split(None, 1)
        name, arity = rest.strip().split("/")
        return Symbol(name.strip(), kind, int(arity))
    except (ValueError, ValidationError) as exc:
        raise ParseError(f"bad symbol declaration {line!r}", no, source) from exc


def load_structure(text: str, header: str = "structure", source=None) -> Structure:
    lines = list(_meaningful_lines(text))
    if not lines:
        raise ParseError("empty structure file", None, source)
    no, head = lines[0]
    parts = head.split()
    if len(parts) != 2 or parts[0] != header or not parts[1].startswith("n="):
        raise ParseError(f"expected '{header} n=<int>' header", no, source)
    try:
        n = int(parts[1][2:])
    except ValueError:
        raise ParseError("domain size is not an integer", no, source) from None
    symbols, tables = [], {}
    i = 1
    ended = False
    while i < len(lines):
        no, line = lines[i]
        if line == "end":
            ended = True
            break
        sym = _parse_decl(line, no, source)
        if sym.name in tables:
            raise ParseError(f"duplicate symbol {sym.name}", no, source)
        expected = n ** sym.arity
        entries: list[int] = []
        i += 1
        # A table may be empty (n = 0) or wrap over several lines.
        while len(entries) < expected:
            if i >= len(lines):
                raise ParseError(f"table for {sym.name} truncated", no, source)
            tno, tline = lines[i]
            if tline == "end" or tline.split()[0] in (FUNC, REL):
                raise ParseError(
                    f"table length mismatch for {sym.name}: got {len(entries)}, expected {expected}",
                    tno, source)
            try:
                entries.extend(int(tok) for tok in tline.split())
            except ValueError:
                raise ParseError(f"non-integer table entry in {tline!r}", tno, source) from None
            if len(entries) > expected:
                raise ParseError(
                    f"table length mismatch for {sym.name}: got {len(entries)}, expected {expected}",
                    tno, source)
            i += 1
        hi = 2 if sym.kind == REL else n
        for v in entries:
            if not 0 <= v < hi:
                raise ParseError(
                    f"value out of domain: {v} in {sym.name}" if sym.kind == FUNC
                    else f"relation entry {v} is not 0/1 in {sym.name}", no, source)
        symbols.append(sym)
        tables[sym.name] = entries
    if not ended:
        raise ParseError("missing 'end'", lines[-1][0], source)
    return Structure(n, Signature(tuple(symbols)), tables)


# ------------------------------------------------------------- d-ary coding

def ceil_root(m: int, d: int) -> int:
    """Smallest k with k**d >= m, by integer search."""
    if m <= 0:
        return 0
    lo, hi = 0, 1
    while hi ** d < m:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if mid ** d >= m:
            hi = mid
        else:
            lo = mid + 1
    return lo


def to_digits(a: int, base: int, width: int) -> tuple[int, ...]:
    """Little-endian digits of a (digit i has weight base**i)."""
    out = []
    for _ in range(width):
        a, r = divmod(a, base)
        out.append(r)
    if a:
        raise ValueError("number does not fit")
    return tuple(out)


def from_digits(digits: Sequence[int], base: int) -> int:
    return sum(x * base ** i for i, x in enumerate(digits))


@dataclass(frozen=True)
class DaryCode:
    d: int
    inner: Structure

    @property
    def n(self):
        return self.inner.n


def code_signature(d: int) -> Signature:
    return Signature(tuple(Symbol(f"g{i}", FUNC, d) for i in range(d)))


def encode_unary_to_dary(s: Structure, d: int) -> DaryCode:
    """Pack a unary structure <[m], f> into d functions of arity d over [n],
    where n - 1 is the integer ceiling of the d-th root of m."""
    if d < 1:
        raise ValidationError("d must be at least 1")
    if len(s.signature) != 1 or s.signature.symbols[0].arity != 1 \
            or s.signature.symbols[0].kind != FUNC:
        raise ValidationError("encoding needs a structure with one unary function")
    m = s.n
    if m < 2:
        raise ValidationError("encoding requires m >= 2")
    f = s.tables[s.signature.symbols[0].name]
    base = ceil_root(m, d)
    n = base + 1
    tables = {f"g{i}": [base] * (n ** d) for i in range(d)}
    for a in range(m):
        idx = table_index(to_digits(a, base, d), n)
        for i, b_i in enumerate(to_digits(f[a], base, d)):
            tables[f"g{i}"][idx] = b_i
    return DaryCode(d, Structure(n, code_signature(d), tables))


def decode_dary(code: DaryCode) -> tuple[int, tuple[int, ...]]:
    """Recover (m, f) from a code, checking every clause of the coding."""
    d, s = code.d, code.inner
    if s.signature != code_signature(d):
        raise ValidationError("not a valid code: wrong signature")
    n = s.n
    base = n - 1
    if base < 0:
        raise ValidationError("not a valid code: empty domain")
    g = [s.tables[f"g{i}"] for i in range(d)]
    m = sum(1 for digits in all_tuples(base, d) if g[0][table_index(digits, n)] < base)
    if m > 0 and not ((base - 1) ** d < m <= base ** d):
        raise ValidationError(f"not a valid code: n-1={base} is not the ceiling root of m={m}")
    f = []
    for idx, args in enumerate(all_tuples(n, d)):
        is_digit_tuple = all(a < base for a in args) and from_digits(args, base) < m
        vals = [gi[idx] for gi in g]
        if is_digit_tuple:
            if any(v >= base for v in vals):
                raise ValidationError(f"not a valid code: digit tuple {args} has filler value")
        elif any(v != base for v in vals):
            raise ValidationError(f"not a valid code: filler tuple {args} has value {vals}")
    for a in range(m):
        idx = table_index(to_digits(a, base, d), n)
        b = from_digits([gi[idx] for gi in g], base)
        if b >= m:
            raise ValidationError(f"not a valid code: f({a})={b} outside [{m}]")
        f.append(b)
    return m, tuple(f)
