"""Nondeterministic RAM with accumulators A, B_1..B_d, read-only input
registers and a guess instruction.

Nondeterminism is externalized: ``guess(A)`` pops the next value of a
certificate tape. ``search_certificate`` rebuilds a tape by exhaustive
depth-first search over the guess points.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import NtispError, ParseError, ValidationError
from .structures import FUNC, REL, Signature, Structure, Symbol

# Mnemonic -> instruction type number of the machine's instruction table.
TYPES = {
    "SETL": 1, "ZERO": 2, "INC": 3, "DEC": 4, "GUESS": 5, "READ": 6, "LOAD": 7,
    "SETB": 8, "STORE": 9, "IFEQ": 10, "ACCEPT": 11, "REJECT": 12,
}

ALIASES = {
    "A:=L": "SETL", "A:=0": "ZERO", "A:=A+1": "INC", "A:=A-1": "DEC",
    "GUESS(A)": "GUESS", "A:=R(A)": "LOAD",
}

ACCEPT, REJECT, BUDGET_EXCEEDED, CERTIFICATE_EXHAUSTED = (
    "accept", "reject", "budget_exceeded", "certificate_exhausted")


class NramRuntimeError(NtispError):
    pass


@dataclass(frozen=True)
class Instr:
    op: str
    args: tuple = ()

    @property
    def type(self) -> int:
        return TYPES[self.op]

    def __str__(self):
        return " ".join([self.op, *map(str, self.args)])


@dataclass(frozen=True)
class NramProgram:
    instructions: tuple[Instr, ...]
    input_signature: Signature
    d: int

    def __post_init__(self):
        lam = len(self.instructions)
        if lam == 0:
            raise ValidationError("empty program")
        accepts = [i for i, ins in enumerate(self.instructions, 1) if ins.op == "ACCEPT"]
        if len(accepts) > 1:
            raise ValidationError(f"duplicate accept at instructions {accepts}")
        if accepts != [lam]:
            raise ValidationError("accept must be the last instruction")
        for idx, ins in enumerate(self.instructions, 1):
            if ins.op == "READ":
                (name,) = ins.args
                if name not in self.input_signature:
                    raise ValidationError(f"instruction {idx}: unknown input symbol {name}")
                if self.input_signature[name].arity > self.d:
                    raise ValidationError(f"instruction {idx}: arity of {name} exceeds d")
            if ins.op in ("SETB", "STORE", "IFEQ"):
                i = ins.args[0]
                if not 1 <= i <= self.d:
                    raise ValidationError(f"instruction {idx}: register B{i} outside 1..{self.d}")
            if ins.op == "IFEQ":
                for target in ins.args[1:]:
                    if not 1 <= target <= lam:
                        raise ValidationError(f"instruction {idx}: goto target {target} out of range")

    def __len__(self):
        return len(self.instructions)

    def __getitem__(self, index: int) -> Instr:
        """1-based access, as in the instruction table."""
        return self.instructions[index - 1]

    def indices_of(self, type_number: int) -> list[int]:
        return [i for i, ins in enumerate(self.instructions, 1) if ins.type == type_number]

    def uses_guess(self) -> bool:
        return any(ins.op == "GUESS" for ins in self.instructions)


def default_d(signature: Signature) -> int:
    return max(1, signature.max_arity)


def make_program(instructions: Sequence, signature: Signature = Signature(), d=None) -> NramProgram:
    instrs = tuple(ins if isinstance(ins, Instr) else Instr(ins[0], tuple(ins[1:]))
                   for ins in instructions)
    return NramProgram(instrs, signature, default_d(signature) if d is None else d)


# ----------------------------------------------------------------- assembly

_ARG_COUNTS = {"READ": 1, "SETB": 1, "STORE": 1, "IFEQ": 3}


def assemble(text: str, signature: Optional[Signature] = None, source=None) -> NramProgram:
    """Parse ``<idx>: <MNEMONIC> [args]`` lines; ``.sig func f/1`` declares
    input symbols and ``.d <k>`` overrides the number of B registers."""
    symbols: list[Symbol] = []
    d = None
    instrs: list[Instr] = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith(".sig"):
            try:
                kind, decl = line[4:].split()
                name, arity = decl.split("/")
                symbols.append(Symbol(name, kind, int(arity)))
            except (ValueError, ValidationError):
                raise ParseError(f"bad signature directive {line!r}", no, source) from None
            continue
        if line.startswith(".d"):
            try:
                d = int(line[2:])
            except ValueError:
                raise ParseError(f"bad register directive {line!r}", no, source) from None
            continue
        m = re.match(r"^(\d+)\s*:\s*(.*)$", line)
        if m:
            if int(m.group(1)) != len(instrs) + 1:
                raise ParseError(f"instruction index {m.group(1)} out of sequence", no, source)
            line = m.group(2)
        for part in line.split(" / ") if " / " in line else [line]:
            instrs.append(_parse_instr(part.strip(), no, source, instrs))
    sig = Signature(tuple(symbols))
    if signature is not None:
        if symbols and sig != signature:
            raise ParseError("declared signature differs from the supplied one", None, source)
        sig = signature
    try:
        return NramProgram(tuple(instrs), sig, default_d(sig) if d is None else d)
    except ValidationError as exc:
        raise ParseError(str(exc), None, source) from None


def _parse_instr(text, no, source, instrs):
    text = re.sub(r"^\d+\s*:\s*", "", text)
    compact = text.replace(" ", "").upper()
    if compact in ALIASES:
        return Instr(ALIASES[compact])
    parts = text.split()
    op = parts[0].upper()
    if op not in TYPES:
        raise ParseError(f"unknown mnemonic {parts[0]!r}", no, source)
    args = parts[1:]
    if len(args) != _ARG_COUNTS.get(op, 0):
        raise ParseError(f"{op} takes {_ARG_COUNTS.get(op, 0)} arguments", no, source)
    if op == "READ":
        return Instr(op, (args[0],))
    try:
        return Instr(op, tuple(int(a) for a in args))
    except ValueError:
        raise ParseError(f"non-integer argument in {text!r}", no, source) from None


def disassemble(program: NramProgram) -> str:
    lines = [f".sig {s.kind} {s.name}/{s.arity}" for s in program.input_signature]
    if program.d != default_d(program.input_signature):
        lines.append(f".d {program.d}")
    lines += [f"{i}: {ins}" for i, ins in enumerate(program.instructions, 1)]
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------- running

@dataclass(frozen=True)
class Budget:
    max_steps: int
    max_address: int
    max_content: int

    def __post_init__(self):
        if min(self.max_steps, self.max_address, self.max_content) <= 0:
            raise ValidationError("budget fields must be positive")

    @classmethod
    def parse(cls, text: str) -> "Budget":
        fields = dict(kv.split("=") for kv in text.split(","))
        return cls(int(fields["steps"]), int(fields["addr"]), int(fields["content"]))


@dataclass
class ResourceMeter:
    steps: int = 0
    max_address: Optional[int] = None
    max_content: int = 0
    guesses_consumed: int = 0

    def as_dict(self):
        return dict(steps=self.steps, max_address=self.max_address,
                    max_content=self.max_content, guesses_consumed=self.guesses_consumed)


@dataclass
class NramConfig:
    pc: int
    A: int
    B: list
    memory: dict = field(default_factory=dict)

    def copy(self) -> "NramConfig":
        return NramConfig(self.pc, self.A, list(self.B), dict(self.memory))

    def read(self, address: int) -> int:
        return self.memory.get(address, 0)


@dataclass(frozen=True)
class TraceEntry:
    """Configuration at one instant, before its instruction executes."""
    pc: int
    A: int
    B: tuple
    memory: tuple  # sorted (address, value) pairs with non-zero value


@dataclass
class RunResult:
    verdict: str
    meter: ResourceMeter
    trace: Optional[list] = None
    config: Optional[NramConfig] = None

    @property
    def accepted(self):
        return self.verdict == ACCEPT


class _Machine:
    def __init__(self, program: NramProgram, input: Structure, budget: Budget):
        self.program = program
        self.input = input
        self.budget = budget
        self.config = NramConfig(1, 0, [0] * program.d)
        self.meter = ResourceMeter()

    def copy(self) -> "_Machine":
        m = _Machine.__new__(_Machine)
        m.program, m.input, m.budget = self.program, self.input, self.budget
        m.config = self.config.copy()
        m.meter = ResourceMeter(**self.meter.as_dict())
        return m

    def snapshot(self) -> TraceEntry:
        c = self.config
        return TraceEntry(c.pc, c.A, tuple(c.B),
                          tuple(sorted((a, v) for a, v in c.memory.items() if v)))

    def _content(self, value):
        if value > self.meter.max_content:
            self.meter.max_content = value
        return value <= self.budget.max_content

    def _address(self, address):
        if self.meter.max_address is None or address > self.meter.max_address:
            self.meter.max_address = address
        return address <= self.budget.max_address

    def step(self, guess=None) -> Optional[str]:
        """Execute one instruction. Returns a verdict when the run stops."""
        c = self.config
        ins = self.program[c.pc]
        if self.meter.steps + 1 > self.budget.max_steps:
            return BUDGET_EXCEEDED
        self.meter.steps += 1
        op = ins.op
        nxt = c.pc + 1
        if op == "ACCEPT":
            return ACCEPT
        if op == "REJECT":
            return REJECT
        if op == "SETL":
            c.A = self.input.n
        elif op == "ZERO":
            c.A = 0
        elif op == "INC":
            c.A += 1
        elif op == "DEC":
            c.A = max(0, c.A - 1)
        elif op == "GUESS":
            c.A = guess
            self.meter.guesses_consumed += 1
        elif op == "READ":
            name = ins.args[0]
            sym = self.input.signature[name]
            args = c.B[:sym.arity]
            if any(b >= self.input.n for b in args):
                raise NramRuntimeError(
                    f"instruction {c.pc}: input access {name}{tuple(args)} outside [{self.input.n}]")
            c.A = self.input.value(name, args)
        elif op == "LOAD":
            if not self._address(c.A):
                return BUDGET_EXCEEDED
            c.A = c.read(c.A)
        elif op == "SETB":
            c.B[ins.args[0] - 1] = c.A
        elif op == "STORE":
            if not self._address(c.A):
                return BUDGET_EXCEEDED
            v = c.B[ins.args[0] - 1]
            c.memory[c.A] = v
            if not self._content(v):
                return BUDGET_EXCEEDED
        elif op == "IFEQ":
            i, then, other = ins.args
            nxt = then if c.A == c.B[i - 1] else other
        c.pc = nxt
        if op in ("SETL", "INC", "GUESS", "READ", "LOAD") and not self._content(c.A):
            return BUDGET_EXCEEDED
        return None


def _check_input(program: NramProgram, input: Structure):
    for sym in program.input_signature:
        if sym.name not in input.signature or input.signature[sym.name] != sym:
            raise ValidationError(f"input structure lacks {sym}")


def run(program: NramProgram, input: Structure, cert: Sequence[int], budget: Budget,
        trace: bool = False) -> RunResult:
    _check_input(program, input)
    m = _Machine(program, input, budget)
    tape = list(cert)
    pos = 0
    entries = [] if trace else None
    while True:
        if trace:
            entries.append(m.snapshot())
        guess = None
        if program[m.config.pc].op == "GUESS":
            if pos >= len(tape):
                return RunResult(CERTIFICATE_EXHAUSTED, m.meter, entries, m.config)
            guess = tape[pos]
            if guess < 0:
                raise ValidationError("certificate values must be non-negative")
            pos += 1
        verdict = m.step(guess)
        if verdict is not None:
            return RunResult(verdict, m.meter, entries, m.config)


def search_certificate(program: NramProgram, input: Structure, budget: Budget,
                       guess_bound: int) -> Optional[list[int]]:
    """Depth-first search for an accepting certificate with values < guess_bound.

    Branches that raise a run-time input-access error count as failures.
    """
    if guess_bound < 1:
        raise ValidationError("guess_bound must be at least 1")
    _check_input(program, input)

    def explore(m: _Machine, cert: list[int]) -> Optional[list[int]]:
        while True:
            if program[m.config.pc].op == "GUESS":
                for v in range(guess_bound):
                    found = explore_after_guess(m.copy(), cert + [v], v)
                    if found is not None:
                        return found
                return None
            try:
                verdict = m.step()
            except NramRuntimeError:
                return None
            if verdict is not None:
                return cert if verdict == ACCEPT else None

    def explore_after_guess(m, cert, v):
        verdict = m.step(v)
        if verdict is not None:
            return cert if verdict == ACCEPT else None
        return explore(m, cert)

    return explore(_Machine(program, input, budget), [])


def load_certificate(text: str) -> list[int]:
    out = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            out.append(int(line))
        except ValueError:
            raise ParseError(f"certificate entry {line!r} is not an integer", no) from None
    return out
