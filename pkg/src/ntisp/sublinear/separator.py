"""Planar separators.

Small graphs (at most EXHAUSTIVE_MAX vertices) are separated by exhaustive
search over candidate sets C in order of size. Larger graphs use the
breadth-first level method: cut two thin BFS levels around the median
level, and if the middle band is still too heavy, contract everything
above it to a root, triangulate, and cut along a fundamental cycle of the
BFS tree chosen through the dual tree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import networkx as nx
from networkx.algorithms.planar_drawing import triangulate_embedding

from ..errors import NtispError, ValidationError
from .planar import PlanarGraph

EXHAUSTIVE_MAX = 12
_ROOT = ("contracted-root",)


@dataclass(frozen=True)
class Separation:
    A: frozenset
    B: frozenset
    C: frozenset


def separator_bound(n: int) -> float:
    return 2 * math.sqrt(2) * math.sqrt(n)


def _within_root_bound(size: int, n: int) -> bool:
    # size <= 2*sqrt(2)*sqrt(n)  <=>  size^2 <= 8n
    return size * size <= 8 * n


def validate_separation(g: PlanarGraph, sep: Separation) -> list:
    """Problems with sep as a separation of g; empty when it is valid.
    Written without reference to how separators are built."""
    problems = []
    A, B, C = set(sep.A), set(sep.B), set(sep.C)
    V = set(range(g.n))
    if A & B or A & C or B & C:
        problems.append("A, B, C are not pairwise disjoint")
    if A | B | C != V:
        problems.append("A, B, C do not cover V")
    for u, v in g.edges:
        if (u in A and v in B) or (u in B and v in A):
            problems.append(f"edge ({u},{v}) joins A and B")
            break
    limit = (2 * g.n) // 3
    if len(A) > limit or len(B) > limit:
        problems.append(f"max(|A|,|B|) = {max(len(A), len(B))} exceeds floor(2n/3) = {limit}")
    if not _within_root_bound(len(C), g.n):
        problems.append(f"|C| = {len(C)} exceeds 2*sqrt(2)*sqrt(n) = {separator_bound(g.n):.3f}")
    return problems


def _group(parts: list, n: int) -> tuple:
    """Split parts (each at most 2n/3) into two sides of at most 2n/3 each:
    largest first, always into the lighter side."""
    A, B = set(), set()
    for p in sorted(parts, key=len, reverse=True):
        (A if len(A) <= len(B) else B).update(p)
    return A, B


# ------------------------------------------------------------- exhaustive

def _exhaustive(G: nx.Graph) -> tuple:
    n = G.number_of_nodes()
    limit = (2 * n) // 3
    nodes = sorted(G.nodes)
    for size in range(n + 1):
        found = None
        for C in combinations(nodes, size):
            rest = G.subgraph(set(nodes) - set(C))
            comps = [set(c) for c in nx.connected_components(rest)]
            total = n - size
            # subset sums of component sizes, remembering one witness each
            reach = {0: ()}
            for i, comp in enumerate(comps):
                for s, chosen in list(reach.items()):
                    reach.setdefault(s + len(comp), chosen + (i,))
            for s, chosen in reach.items():
                if s <= limit and total - s <= limit:
                    gap = abs(total - 2 * s)
                    if found is None or gap < found[0]:
                        found = (gap, C, comps, chosen, set(rest.nodes))
        if found is not None:
            _, C, comps, chosen, rest = found
            A = set().union(*(comps[i] for i in chosen)) if chosen else set()
            return A, rest - A, set(C)
    raise NtispError("no separator found")  # unreachable: C = V always works


# ----------------------------------------------------- level/cycle method

def _levels_connected(G: nx.Graph) -> tuple:
    """Parts and separator for a connected planar graph G."""
    n = G.number_of_nodes()
    root = min(G.nodes, key=repr)
    dist = nx.single_source_shortest_path_length(G, root)
    r = max(dist.values())
    levels = [[] for _ in range(r + 1)]
    for v, d in dist.items():
        levels[d].append(v)
    size = lambda l: len(levels[l]) if 0 <= l <= r else 0

    acc = 0
    for l1 in range(r + 1):
        if 2 * (acc + size(l1)) >= n:
            break
        acc += size(l1)
    k = acc + size(l1)
    l0 = next((l for l in range(l1, -2, -1) if _within_half_root(size(l) + 2 * (l1 - l), k)), None)
    l2 = next((l for l in range(l1 + 1, r + 2) if _within_half_root(size(l) + 2 * (l - l1 - 1), n - k)), None)
    if l0 is None or l2 is None:
        raise NtispError("thin levels not found")

    collect = lambda lo, hi: {v for l in range(max(lo, 0), min(hi, r) + 1) for v in levels[l]}
    top = collect(0, l0 - 1)
    middle = collect(l0 + 1, l2 - 1)
    bottom = collect(l2 + 1, r)
    cut = collect(l0, l0) | collect(l2, l2)
    if 3 * len(middle) <= 2 * n:
        return [top, middle, bottom], cut

    inside, outside, cycle = _cycle_cut(G, middle, collect(l0 + 1, l0 + 1) if l0 >= 0 else {root}, n)
    return [top, inside, outside, bottom], cut | cycle


def _within_half_root(a: int, k: int) -> bool:
    # a <= 2*sqrt(k)
    return a <= 0 or a * a <= 4 * k


def _cycle_cut(G: nx.Graph, middle: set, first_level: set, n: int) -> tuple:
    H = nx.Graph(G.subgraph(middle))
    H.add_node(_ROOT)
    H.add_edges_from((_ROOT, v) for v in first_level)
    parent = {_ROOT: None}
    depth = {_ROOT: 0}
    for u, v in nx.bfs_edges(H, _ROOT):
        parent[v] = u
        depth[v] = depth[u] + 1
    tree = {frozenset((v, p)) for v, p in parent.items() if p is not None}

    ok, emb = nx.check_planarity(H)
    if not ok:
        raise ValidationError("graph is not planar")
    tri, _ = triangulate_embedding(emb, True)

    face_of = {}
    faces = []
    for u, v in tri.edges():
        if (u, v) in face_of:
            continue
        cyc = tri.traverse_face(u, v)
        fid = len(faces)
        faces.append(cyc)
        for i in range(len(cyc)):
            face_of[(cyc[i], cyc[(i + 1) % len(cyc)])] = fid

    # dual tree over the non-tree edges
    dual = [[] for _ in faces]
    nontree = []
    for u, v in tri.edges():
        if repr(u) < repr(v) and frozenset((u, v)) not in tree:
            a, b = face_of[(u, v)], face_of[(v, u)]
            nontree.append((u, v))
            dual[a].append((b, (u, v)))
            dual[b].append((a, (u, v)))
    up_edge = {0: None}
    dual_parent = {}
    order = [0]
    stack = [0]
    while stack:
        f = stack.pop()
        for g, e in dual[f]:
            if g not in up_edge:
                up_edge[g] = e
                dual_parent[g] = f
                order.append(g)
                stack.append(g)
    if len(order) != len(faces):
        raise NtispError("non-tree edges do not form a dual spanning tree")
    subtree = [1] * len(faces)
    for f in reversed(order[1:]):
        subtree[dual_parent[f]] += subtree[f]
    # Euler-tour intervals to test face membership in a subtree
    kids = {f: [] for f in range(len(faces))}
    for f, p in dual_parent.items():
        kids[p].append(f)
    tin, tout = {}, {}
    clock = 0
    stack = [(0, False)]
    while stack:
        f, done = stack.pop()
        if done:
            tout[f] = clock
            continue
        tin[f] = clock
        clock += 1
        stack.append((f, True))
        stack.extend((g, False) for g in kids[f])
    in_sub = lambda f, s: tin[s] <= tin[f] < tout[s]

    root_face = face_of[next((_ROOT, w) for w in tri.neighbors(_ROOT))]
    total = H.number_of_nodes()

    def cycle_of(u, v):
        left, right = [u], [v]
        a, b = u, v
        while depth[a] > depth[b]:
            a = parent[a]; left.append(a)
        while depth[b] > depth[a]:
            b = parent[b]; right.append(b)
        while a != b:
            a = parent[a]; left.append(a)
            b = parent[b]; right.append(b)
        return left + right[-2::-1]

    best = None
    for u, v in nontree:
        fa, fb = face_of[(u, v)], face_of[(v, u)]
        child = fa if up_edge[fa] == (u, v) else fb
        cyc = cycle_of(u, v)
        c = len(cyc)
        ins = (subtree[child] - c + 2) // 2
        outs = total - c - ins
        if _ROOT not in cyc:
            if in_sub(root_face, child):
                ins -= 1
            else:
                outs -= 1
        if 3 * max(ins, outs) <= 2 * n:
            if best is None or c < best[0]:
                best = (c, cyc, child)
    if best is None:
        raise NtispError("no balanced fundamental cycle found")
    _, cyc, child = best
    on_cycle = set(cyc)
    incident = {}
    for (a, b), f in face_of.items():
        incident.setdefault(a, f)
    inside = {v for v in middle if v not in on_cycle and in_sub(incident[v], child)}
    outside = middle - on_cycle - inside
    return inside, outside, on_cycle - {_ROOT}


def separate_nx(G: nx.Graph) -> tuple:
    """(A, B, C) for an arbitrary planar nx graph."""
    n = G.number_of_nodes()
    if n == 0:
        return set(), set(), set()
    if n <= EXHAUSTIVE_MAX:
        return _exhaustive(G)
    comps = sorted((set(c) for c in nx.connected_components(G)), key=len, reverse=True)
    if 3 * len(comps[0]) <= 2 * n:
        A, B = _group(comps, n)
        return A, B, set()
    parts, C = _levels_connected(G.subgraph(comps[0]))
    A, B = _group([p for p in parts if p] + comps[1:], n)
    return A, B, C


def planar_separator(g: PlanarGraph) -> Separation:
    g.embedding()  # rejects non-planar input
    A, B, C = separate_nx(g.nx())
    sep = Separation(frozenset(A), frozenset(B), frozenset(C))
    problems = validate_separation(g, sep)
    if problems:
        raise NtispError("separator failed validation: " + "; ".join(problems))
    return sep
