"""Partition and Knapsack over base-b digit strings with O(sqrt(n)) live
digit registers, n being the total number of input digits.

Numbers with at most ceil(n^d) - 1 digits are small: once a side (or an
inclusion bit) is guessed they are added into an accumulator and never
looked at again. The few large numbers keep only their guessed bit; their
digits are re-read from the input during one final least-significant-first
sweep that carries (or borrows) position by position.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence

from ..errors import ParseError, ValidationError

SAT, UNSAT = "sat", "unsat"


@dataclass
class NumericResult:
    verdict: str
    peak_registers: int
    certificate: Optional[list] = None
    reason: str = ""
    size: int = 0


# ------------------------------------------------------------ digit helpers

def digits_of(value: int, base: int) -> tuple:
    """Most significant digit first; zero is the single digit 0."""
    if value < 0:
        raise ValidationError("numbers must be non-negative")
    out = []
    while True:
        value, r = divmod(value, base)
        out.append(r)
        if value == 0:
            return tuple(reversed(out))


def value_of(digits: Sequence[int], base: int) -> int:
    v = 0
    for d in digits:
        v = v * base + d
    return v


def natural_base(values: Sequence[int]) -> int:
    """Smallest b >= 2 whose total digit count over values is at most b."""
    b = 2
    while sum(len(digits_of(v, b)) for v in values) > b:
        b += 1
    return b


def _as_digits(x, base: int) -> tuple:
    if isinstance(x, int):
        return digits_of(x, base)
    ds = tuple(x)
    if not ds:
        raise ValidationError("empty digit string")
    for d in ds:
        if not isinstance(d, int) or not 0 <= d < base:
            raise ValidationError(f"digit {d!r} is not in [0,{base})")
    return ds


def small_limit(n: int, d: float = 0.5) -> int:
    """Numbers with at most this many digits are small: ceil(n^d) - 1."""
    if n <= 0:
        return 0
    if d == 0.5:
        r = math.isqrt(n)
        return (r if r * r == n else r + 1) - 1
    return math.ceil(n ** d) - 1


class _Registers:
    def __init__(self):
        self.live = 0
        self.peak = 0

    def grow(self, k: int = 1):
        self.live += k
        self.peak = max(self.peak, self.live)

    def shrink(self, k: int = 1):
        self.live -= k


class _Accumulator:
    """Little-endian digit register that grows as sums need more digits."""

    def __init__(self, base: int, regs: _Registers):
        self.base = base
        self.digits = []
        self.regs = regs

    def add(self, ds: tuple):
        carry = 0
        for i, d in enumerate(reversed(ds)):
            if i == len(self.digits):
                self.digits.append(0)
                self.regs.grow()
            carry, self.digits[i] = divmod(self.digits[i] + d + carry, self.base)
        i = len(ds)
        while carry:
            if i == len(self.digits):
                self.digits.append(0)
                self.regs.grow()
            carry, self.digits[i] = divmod(self.digits[i] + carry, self.base)
            i += 1

    def digit(self, p: int) -> int:
        return self.digits[p] if p < len(self.digits) else 0


def _signed_sweep(terms: list, base: int, regs: _Registers) -> tuple:
    """Digest sum(sign * number) position by position, least significant
    first. Returns (all column digits were 0, final carry). The total is
    non-negative iff the final carry is, and zero iff both are zero."""
    width = max((length for _, _, length in terms), default=0)
    regs.grow(2)  # carry and current column
    carry = 0
    zero = True
    for p in range(width):
        col = carry + sum(sign * digit(p) for sign, digit, _ in terms)
        carry, r = divmod(col, base)
        zero = zero and r == 0
    regs.shrink(2)
    return zero, carry


def _msd_digit(ds: tuple):
    return lambda p: ds[-1 - p] if p < len(ds) else 0


# -------------------------------------------------------------- partition

def stream_partition(numbers: Sequence, base: Optional[int] = None, mode: str = "verify",
                     cert=None, d: float = 0.5) -> NumericResult:
    """Can the numbers be split into two sides of equal sum? verify reads
    one side bit per number (1 puts it in A); search tries every vector."""
    if base is None:
        base = natural_base([x for x in numbers if isinstance(x, int)]) if all(isinstance(x, int) for x in numbers) else None
    if base is None or base < 2:
        raise ValidationError("a base >= 2 is required for digit strings")
    nums = [_as_digits(x, base) for x in numbers]
    n = sum(len(ds) for ds in nums)
    if mode == "search":
        peak = 0
        for bits in product((0, 1), repeat=len(nums)):
            r = _partition_verify(nums, base, list(bits), n, d)
            peak = max(peak, r.peak_registers)
            if r.verdict == SAT:
                r.peak_registers = peak
                return r
        return NumericResult(UNSAT, peak, None, "no balanced split", n)
    if mode != "verify":
        raise ValidationError(f"unknown mode {mode!r}")
    if cert is None or len(cert) != len(nums) or any(b not in (0, 1) for b in cert):
        raise ValidationError(f"certificate must be {len(nums)} side bits")
    return _partition_verify(nums, base, list(cert), n, d)


def _partition_verify(nums, base, bits, n, d) -> NumericResult:
    regs = _Registers()
    limit = small_limit(n, d)
    acc = {0: _Accumulator(base, regs), 1: _Accumulator(base, regs)}
    large = []                 # (index, side bit); only the bit is a register
    for i, ds in enumerate(nums):
        side = bits[i]
        if len(ds) <= limit:
            acc[side].add(ds)
        else:
            large.append((i, side))
            regs.grow()
    terms = [(1, acc[1].digit, len(acc[1].digits)), (-1, acc[0].digit, len(acc[0].digits))]
    terms += [(1 if side else -1, _msd_digit(nums[i]), len(nums[i])) for i, side in large]
    zero, carry = _signed_sweep(terms, base, regs)
    ok = zero and carry == 0
    return NumericResult(SAT if ok else UNSAT, regs.peak, bits if ok else None,
                         "" if ok else "side sums differ", n)


def partition_oracle(values: Sequence[int]) -> bool:
    total = sum(values)
    if total % 2:
        return False
    sums = {0}
    for v in values:
        sums |= {s + v for s in sums}
    return total // 2 in sums


# --------------------------------------------------------------- knapsack

def stream_knapsack(items: Sequence, B, K, base: Optional[int] = None, mode: str = "verify",
                    cert=None, d: float = 0.5) -> NumericResult:
    """Is there a subset with total size <= B and total value >= K?
    items are (size, value) pairs; cert is one inclusion bit per item."""
    if base is None:
        flat = [x for it in items for x in it] + [B, K]
        if not all(isinstance(x, int) for x in flat):
            raise ValidationError("a base >= 2 is required for digit strings")
        base = natural_base(flat)
    if base < 2:
        raise ValidationError("base must be at least 2")
    its = [(_as_digits(s, base), _as_digits(v, base)) for s, v in items]
    Bd, Kd = _as_digits(B, base), _as_digits(K, base)
    n = sum(len(s) + len(v) for s, v in its) + len(Bd) + len(Kd)
    if mode == "search":
        peak = 0
        for bits in product((0, 1), repeat=len(its)):
            r = _knapsack_verify(its, Bd, Kd, base, list(bits), n, d)
            peak = max(peak, r.peak_registers)
            if r.verdict == SAT:
                r.peak_registers = peak
                return r
        return NumericResult(UNSAT, peak, None, "no feasible subset", n)
    if mode != "verify":
        raise ValidationError(f"unknown mode {mode!r}")
    if cert is None or len(cert) != len(its) or any(b not in (0, 1) for b in cert):
        raise ValidationError(f"certificate must be {len(its)} inclusion bits")
    return _knapsack_verify(its, Bd, Kd, base, list(cert), n, d)


def _knapsack_verify(its, Bd, Kd, base, bits, n, d) -> NumericResult:
    regs = _Registers()
    limit = small_limit(n, d)
    size_acc, value_acc = _Accumulator(base, regs), _Accumulator(base, regs)
    large_s, large_v = [], []
    for i, (s, v) in enumerate(its):
        if not bits[i]:
            continue
        for ds, acc, big in ((s, size_acc, large_s), (v, value_acc, large_v)):
            if len(ds) <= limit:
                acc.add(ds)
            else:
                big.append(i)
                regs.grow()
    terms = [(1, _msd_digit(Bd), len(Bd)), (-1, size_acc.digit, len(size_acc.digits))]
    terms += [(-1, _msd_digit(its[i][0]), len(its[i][0])) for i in large_s]
    _, room = _signed_sweep(terms, base, regs)
    terms = [(1, value_acc.digit, len(value_acc.digits)), (-1, _msd_digit(Kd), len(Kd))]
    terms += [(1, _msd_digit(its[i][1]), len(its[i][1])) for i in large_v]
    _, gain = _signed_sweep(terms, base, regs)
    ok = room >= 0 and gain >= 0
    reason = "" if ok else ("total size exceeds B" if room < 0 else "total value below K")
    return NumericResult(SAT if ok else UNSAT, regs.peak, bits if ok else None, reason, n)


def knapsack_oracle(items: Sequence, B: int, K: int) -> bool:
    """DP over reachable total sizes, keeping the best value for each."""
    best = {0: 0}
    for s, v in items:
        for size, val in list(best.items()):
            t = size + s
            if t <= B and best.get(t, -1) < val + v:
                best[t] = val + v
    return max(best.values()) >= K


# ------------------------------------------------------------------ format

def _digit_line(text: str, lineno: int, source: str) -> tuple:
    try:
        ds = tuple(int(t) for t in text.split())
    except ValueError:
        raise ParseError(f"malformed digit string {text.strip()!r}", lineno, source) from None
    if not ds or any(x < 0 for x in ds):
        raise ParseError(f"malformed digit string {text.strip()!r}", lineno, source)
    return ds


def load_numbers(text: str, source: str = "<numbers>") -> tuple:
    """One digit string per line, digits separated by spaces, most
    significant first. An optional `base <b>` line fixes the base;
    otherwise it is max(2, total digits, largest digit + 1)."""
    base = None
    nums = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("base"):
            base = int(line.split()[1])
            continue
        nums.append((_digit_line(line, lineno, source), lineno))
    return _with_base([ds for ds, _ in nums], base, nums, source)


def _with_base(all_digits, base, located, source):
    total = sum(len(ds) for ds in all_digits)
    top = max((x for ds in all_digits for x in ds), default=0)
    if base is None:
        base = max(2, total, top + 1)
    for ds, lineno in located:
        if any(x >= base for x in ds):
            raise ParseError(f"digit not below base {base}", lineno, source)
    return [ds for ds, _ in located], base


def load_knapsack(text: str, source: str = "<knapsack>") -> tuple:
    """Lines `B: <digits>`, `K: <digits>` and `item: <size digits> | <value
    digits>`, with an optional `base <b>` line."""
    base = None
    items, B, K, located = [], None, None, []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("base"):
            base = int(line.split()[1])
            continue
        head, sep, rest = line.partition(":")
        if not sep:
            raise ParseError("expected 'B:', 'K:' or 'item:'", lineno, source)
        head = head.strip()
        if head == "item":
            s, bar, v = rest.partition("|")
            if not bar:
                raise ParseError("item needs 'size | value'", lineno, source)
            pair = (_digit_line(s, lineno, source), _digit_line(v, lineno, source))
            items.append(pair)
            located += [(pair[0], lineno), (pair[1], lineno)]
        elif head in ("B", "K"):
            ds = _digit_line(rest, lineno, source)
            located.append((ds, lineno))
            if head == "B":
                B = ds
            else:
                K = ds
        else:
            raise ParseError(f"unknown line kind {head!r}", lineno, source)
    if B is None or K is None:
        raise ParseError("both B and K are required", 0, source)
    _, base = _with_base([ds for ds, _ in located], base, located, source)
    return items, B, K, base
