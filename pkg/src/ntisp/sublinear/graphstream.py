"""Branch-streaming 3-coloring and vertex cover over a separating tree.

Both walk the tree depth first. Only the vertices of the nodes on the
current root-to-node path carry a label, so live memory is bounded by the
heaviest branch. An edge is checked when its second endpoint is labelled,
which is always on the same branch by the tree property.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional

from ..errors import ValidationError
from .planar import PlanarGraph
from .septree import SeparatingTree, validate_tree

SAT, UNSAT = "sat", "unsat"


@dataclass
class StreamResult:
    verdict: str
    peak_live: int
    certificate: Optional[list] = None
    reason: str = ""


class _Meter:
    def __init__(self):
        self.live = {}
        self.peak = 0

    def put(self, v, label):
        self.live[v] = label
        self.peak = max(self.peak, len(self.live))

    def drop(self, v):
        del self.live[v]


def _check_tree(g: PlanarGraph, tree: SeparatingTree) -> None:
    problems = validate_tree(g, tree)
    if problems:
        raise ValidationError("invalid separating tree: " + "; ".join(problems))


def _read_cert(cert, n: int, allowed: range, what: str) -> list:
    if cert is None or len(cert) != n:
        raise ValidationError(f"{what} certificate must give one label per vertex ({n})")
    for v, c in enumerate(cert):
        if c not in allowed:
            raise ValidationError(f"label {c} of vertex {v} is not in {list(allowed)}")
    return list(cert)


# ------------------------------------------------------------- 3-coloring

def stream_3color(g: PlanarGraph, tree: SeparatingTree, mode: str = "verify",
                  cert=None, full_pass: bool = False) -> StreamResult:
    """verify: cert[v] in {0,1,2} is read when v's node is entered.
    With full_pass the walk continues after a conflict, so the meter covers
    the whole tree. search: backtracking over node colorings."""
    _check_tree(g, tree)
    adj = g.adjacency()
    meter = _Meter()
    if mode == "verify":
        colors = _read_cert(cert, g.n, range(3), "coloring")
        bad = []

        def walk(node) -> bool:
            for v in node.vertices:
                c = colors[v]
                for w in adj[v]:
                    if meter.live.get(w) == c:
                        bad.append((min(v, w), max(v, w)))
                        if not full_pass:
                            return False
                meter.put(v, c)
            ok = all([walk(ch) for ch in node.children]) if full_pass else all(walk(ch) for ch in node.children)
            for v in node.vertices:
                meter.live.pop(v, None)
            return ok and not bad

        ok = walk(tree.root)
        reason = "" if ok else f"edge {bad[0]} is monochromatic"
        return StreamResult(SAT if ok else UNSAT, meter.peak, colors if ok else None, reason)
    if mode != "search":
        raise ValidationError(f"unknown mode {mode!r}")

    def colorings(vs, i):
        if i == len(vs):
            yield
            return
        v = vs[i]
        for c in range(3):
            if all(meter.live.get(w) != c for w in adj[v]):
                meter.put(v, c)
                try:
                    yield from colorings(vs, i + 1)
                finally:
                    meter.drop(v)

    def solve(node):
        for _ in colorings(node.vertices, 0):
            found = {v: meter.live[v] for v in node.vertices}
            for ch in node.children:
                sub = solve(ch)
                if sub is None:
                    break
                found.update(sub)
            else:
                return found
        return None

    found = solve(tree.root)
    if found is None:
        return StreamResult(UNSAT, meter.peak, None, "no 3-coloring")
    return StreamResult(SAT, meter.peak, [found[v] for v in range(g.n)])


def three_colorable(g: PlanarGraph) -> Optional[list]:
    """Plain backtracking oracle over vertices 0..n-1; a coloring or None."""
    adj = g.adjacency()
    col = [-1] * g.n

    def go(v):
        if v == g.n:
            return True
        for c in range(3):
            if all(col[w] != c for w in adj[v]):
                col[v] = c
                if go(v + 1):
                    return True
        col[v] = -1
        return False

    return list(col) if go(0) else None


# ----------------------------------------------------------- vertex cover

def stream_vertex_cover(g: PlanarGraph, tree: SeparatingTree, k: int, mode: str = "verify",
                        cert=None) -> StreamResult:
    """verify: cert[v] = 1 puts v in the cover; a running count must stay
    at most k. search: per subtree minimum over node labelings given the
    labels on the path. peak_live counts labelled vertices; the running
    count is one extra register."""
    _check_tree(g, tree)
    if k < 0:
        raise ValidationError("k must be non-negative")
    adj = g.adjacency()
    meter = _Meter()
    if mode == "verify":
        labels = _read_cert(cert, g.n, range(2), "cover")
        count = 0
        fail = [""]

        def walk(node) -> bool:
            nonlocal count
            for v in node.vertices:
                lab = labels[v]
                if lab == 0:
                    for w in adj[v]:
                        if meter.live.get(w) == 0:
                            fail[0] = f"edge ({min(v, w)},{max(v, w)}) is uncovered"
                            return False
                count += lab
                if count > k:
                    fail[0] = f"cover exceeds k={k}"
                    return False
                meter.put(v, lab)
            ok = all(walk(ch) for ch in node.children)
            for v in node.vertices:
                meter.live.pop(v, None)
            return ok

        ok = walk(tree.root)
        return StreamResult(SAT if ok else UNSAT, meter.peak, labels if ok else None, fail[0])
    if mode != "search":
        raise ValidationError(f"unknown mode {mode!r}")

    def labelings(vs, i):
        if i == len(vs):
            yield
            return
        v = vs[i]
        for lab in (0, 1):
            if lab == 1 or all(meter.live.get(w) != 0 for w in adj[v]):
                meter.put(v, lab)
                try:
                    yield from labelings(vs, i + 1)
                finally:
                    meter.drop(v)

    def best(node):
        top = None
        for _ in labelings(node.vertices, 0):
            found = {v: meter.live[v] for v in node.vertices}
            cost = sum(found.values())
            for ch in node.children:
                c, sub = best(ch)
                cost += c
                found.update(sub)
            if top is None or cost < top[0]:
                top = (cost, found)
        return top

    cost, found = best(tree.root)
    if cost > k:
        return StreamResult(UNSAT, meter.peak, None, f"minimum cover {cost} exceeds k={k}")
    return StreamResult(SAT, meter.peak, [found[v] for v in range(g.n)])


def min_vertex_cover(g: PlanarGraph) -> int:
    """Brute force over subsets by increasing size."""
    for size in range(g.n + 1):
        for S in combinations(range(g.n), size):
            s = set(S)
            if all(u in s or v in s for u, v in g.edges):
                return size
    return g.n
