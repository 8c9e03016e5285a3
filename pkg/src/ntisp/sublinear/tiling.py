"""d-dimensional constraint tiling, verified or searched one slice at a time.

A tile is a tuple of 2d face colors: entry 2i is the face towards lower
coordinates on axis i and entry 2i+1 the face towards higher ones. Two
cells adjacent along axis i agree when the lower cell's face 2i+1 equals
the upper cell's face 2i.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Optional

import numpy as np

from ..errors import ParseError, ValidationError

SAT, UNSAT = "sat", "unsat"


@dataclass(frozen=True)
class GridTiling:
    d: int
    dims: tuple
    allowed: dict        # coordinate tuple -> tuple of tiles

    def __post_init__(self):
        if self.d < 1 or len(self.dims) != self.d:
            raise ValidationError(f"dims {self.dims} do not match d={self.d}")
        if any(m < 1 for m in self.dims):
            raise ValidationError("every dimension must be at least 1")
        for x in product(*(range(m) for m in self.dims)):
            tiles = self.allowed.get(x)
            if not tiles:
                raise ValidationError(f"cell {x} has an empty allowed set")
            for t in tiles:
                if len(t) != 2 * self.d:
                    raise ValidationError(f"tile {t} at {x} needs {2 * self.d} face colors")
        extra = set(self.allowed) - set(product(*(range(m) for m in self.dims)))
        if extra:
            raise ValidationError(f"cell {sorted(extra)[0]} lies outside the grid")

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    @property
    def axis(self) -> int:
        """Streaming axis: the longest one (first on ties)."""
        return max(range(self.d), key=lambda i: (self.dims[i], -i))

    def slices(self) -> list:
        """Cells grouped by their coordinate on the streaming axis, each
        slice in lexicographic order: the row order of certificates."""
        ax = self.axis
        cells = sorted(product(*(range(m) for m in self.dims)), key=lambda x: (x[ax], x))
        out = [[] for _ in range(self.dims[ax])]
        for x in cells:
            out[x[ax]].append(x)
        return out


@dataclass
class TilingResult:
    verdict: str
    peak_live: int
    certificate: Optional[list] = None
    reason: str = ""


def _agree(lower_tile, upper_tile, axis) -> bool:
    return lower_tile[2 * axis + 1] == upper_tile[2 * axis]


def _neighbours_before(x):
    """Cells one step lower on each axis (those checked against x)."""
    for i in range(len(x)):
        if x[i] > 0:
            yield i, x[:i] + (x[i] - 1,) + x[i + 1:]


def stream_tiling(t: GridTiling, mode: str = "verify", cert=None) -> TilingResult:
    """verify: cert lists one tile index per cell in row order. search: DFS
    over slice assignments, remembering slices that cannot be extended."""
    if t.d < 2:
        raise ValidationError("tiling needs d >= 2")
    slices = t.slices()
    if mode == "verify":
        order = [x for sl in slices for x in sl]
        if cert is None or len(cert) != len(order):
            raise ValidationError(f"certificate must hold {len(order)} tile choices")
        it = iter(cert)
        prev, peak = {}, 0
        for s, sl in enumerate(slices):
            cur = {}
            for x in sl:
                k = next(it)
                if not isinstance(k, int) or not 0 <= k < len(t.allowed[x]):
                    raise ValidationError(f"tile choice {k} out of range at {x}")
                cur[x] = t.allowed[x][k]
                peak = max(peak, len(prev) + len(cur))
                for i, y in _neighbours_before(x):
                    tile = cur.get(y, prev.get(y))
                    if not _agree(tile, cur[x], i):
                        return TilingResult(UNSAT, peak, None, f"faces of {y} and {x} disagree")
            prev = cur  # slice s-1 is dropped before s+1 loads
        return TilingResult(SAT, peak, list(cert))
    if mode != "search":
        raise ValidationError(f"unknown mode {mode!r}")

    dead = set()
    peak = [0]

    def fill(s, prev, cur, j):
        sl = slices[s]
        if j == len(sl):
            yield dict(cur)
            return
        x = sl[j]
        for k, tile in enumerate(t.allowed[x]):
            if all(_agree(cur.get(y, prev.get(y)), tile, i) for i, y in _neighbours_before(x)):
                cur[x] = tile
                cur_k[x] = k
                peak[0] = max(peak[0], len(prev) + len(cur))
                yield from fill(s, prev, cur, j + 1)
                del cur[x]

    cur_k = {}

    def solve(s, prev):
        if s == len(slices):
            return []
        for assign in fill(s, prev, {}, 0):
            key = (s, tuple(sorted(assign.items())))
            if key in dead:
                continue
            choice = [cur_k[x] for x in slices[s]]
            rest = solve(s + 1, assign)
            if rest is not None:
                return choice + rest
            dead.add(key)
        return None

    found = solve(0, {})
    if found is None:
        return TilingResult(UNSAT, peak[0], None, "no tiling")
    return TilingResult(SAT, peak[0], found)


def brute_force_tiling(t: GridTiling) -> Optional[dict]:
    """Try every choice vector; a satisfying coordinate -> tile map or None."""
    cells = sorted(t.allowed)
    for choice in product(*(range(len(t.allowed[x])) for x in cells)):
        tiles = {x: t.allowed[x][k] for x, k in zip(cells, choice)}
        if all(_agree(tiles[y], tiles[x], i) for x in cells for i, y in _neighbours_before(x)):
            return tiles
    return None


def random_tiling(rng: np.random.Generator, dims, max_tiles: int = 3, colors: int = 2) -> GridTiling:
    d = len(dims)
    allowed = {}
    for x in product(*(range(m) for m in dims)):
        k = int(rng.integers(1, max_tiles + 1))
        allowed[x] = tuple(tuple(int(c) for c in rng.integers(0, colors, 2 * d)) for _ in range(k))
    return GridTiling(d, tuple(dims), allowed)


# ------------------------------------------------------------------ format

def dump_tiling(t: GridTiling) -> str:
    lines = [f"tiling d={t.d} dims=" + ",".join(map(str, t.dims))]
    for x in sorted(t.allowed):
        tiles = "; ".join("tile " + " ".join(map(str, tile)) for tile in t.allowed[x])
        lines.append("cell " + ",".join(map(str, x)) + ": " + tiles)
    return "\n".join(lines) + "\nend\n"


def load_tiling(text: str, source: str = "<tiling>") -> GridTiling:
    d = dims = None
    allowed = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or line == "end":
            continue
        try:
            if line.startswith("tiling"):
                fields = dict(tok.split("=", 1) for tok in line.split()[1:])
                d = int(fields["d"])
                dims = tuple(int(v) for v in fields["dims"].split(","))
            elif line.startswith("cell"):
                if d is None:
                    raise ValueError("cell before header")
                head, _, rest = line[4:].partition(":")
                x = tuple(int(v) for v in head.split(","))
                tiles = []
                for part in rest.split(";"):
                    toks = part.split()
                    if toks and toks[0] == "tile":
                        toks = toks[1:]
                    if toks:
                        tiles.append(tuple(int(v) for v in toks))
                allowed[x] = tuple(tiles)
            else:
                raise ValueError(f"unknown line {line!r}")
        except (ValueError, KeyError) as exc:
            raise ParseError(str(exc), lineno, source) from None
    if d is None:
        raise ParseError("missing 'tiling' header", 1, source)
    try:
        return GridTiling(d, dims, allowed)
    except ValidationError as exc:
        raise ParseError(str(exc), 0, source) from None
