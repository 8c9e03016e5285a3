"""Planar graphs: the graph type, its text format, embeddings and a few
generators used by the tests and the CLI."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import networkx as nx
import numpy as np
from scipy.spatial import Delaunay

from ..errors import ParseError, ValidationError


@dataclass(frozen=True)
class PlanarGraph:
    n: int
    edges: tuple                        # sorted pairs (u, v), u < v
    rotation: Optional[dict] = None     # v -> neighbours in cyclic order

    def __post_init__(self):
        if self.n < 0:
            raise ValidationError("vertex count must be non-negative")
        seen = set()
        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValidationError(f"edge ({u},{v}) leaves [0,{self.n})")
            if u == v:
                raise ValidationError(f"loop at {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValidationError(f"duplicate edge {key}")
            seen.add(key)
        if self.n >= 3 and len(self.edges) > 3 * self.n - 6:
            raise ValidationError(f"{len(self.edges)} edges exceed 3n-6; not planar")

    @staticmethod
    def from_edges(n: int, edges, rotation=None) -> "PlanarGraph":
        return PlanarGraph(n, tuple(sorted((min(u, v), max(u, v)) for u, v in edges)), rotation)

    def nx(self) -> nx.Graph:
        G = nx.Graph()
        G.add_nodes_from(range(self.n))
        G.add_edges_from(self.edges)
        return G

    def adjacency(self) -> list:
        adj = [set() for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def embedding(self) -> nx.PlanarEmbedding:
        """The supplied rotation system if any (checked), else one found by a
        planarity test. Raises ValidationError on non-planar input."""
        if self.rotation is not None:
            emb = nx.PlanarEmbedding()
            emb.add_nodes_from(range(self.n))
            for v, order in self.rotation.items():
                prev = None
                for w in order:
                    emb.add_half_edge(v, w, cw=prev) if prev is not None else emb.add_half_edge(v, w)
                    prev = w
            try:
                emb.check_structure()
            except nx.NetworkXException as exc:
                raise ValidationError(f"rotation system is not a planar embedding: {exc}") from None
            got = {(min(u, v), max(u, v)) for u, v in emb.edges()}
            if got != set(self.edges):
                raise ValidationError("rotation system does not list exactly the graph's edges")
            return emb
        ok, emb = nx.check_planarity(self.nx())
        if not ok:
            raise ValidationError("graph is not planar")
        return emb


def require_planar(g: PlanarGraph) -> None:
    g.embedding()


# ------------------------------------------------------------------ format

def dump_graph(g: PlanarGraph) -> str:
    lines = [f"graph n={g.n}"]
    lines += [f"e {u} {v}" for u, v in g.edges]
    if g.rotation is not None:
        index = {e: i for i, e in enumerate(g.edges)}
        for v in sorted(g.rotation):
            ids = [index[(min(v, w), max(v, w))] for w in g.rotation[v]]
            lines.append(f"rot {v}: " + " ".join(map(str, ids)))
    return "\n".join(lines) + "\n"


def load_graph(text: str, source: str = "<graph>") -> PlanarGraph:
    n = None
    edges = []
    rot_ids = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "graph":
                if len(parts) != 2 or not parts[1].startswith("n="):
                    raise ValueError("expected 'graph n=<int>'")
                n = int(parts[1][2:])
            elif parts[0] == "e":
                if n is None:
                    raise ValueError("edge before header")
                if len(parts) != 3:
                    raise ValueError("expected 'e u v'")
                edges.append((int(parts[1]), int(parts[2])))
            elif parts[0] == "rot":
                head, _, rest = line[3:].partition(":")
                rot_ids[int(head)] = [int(t) for t in rest.split()]
            else:
                raise ValueError(f"unknown line kind {parts[0]!r}")
        except ValueError as exc:
            raise ParseError(str(exc), lineno, source) from None
    if n is None:
        raise ParseError("missing 'graph n=' header", 1, source)
    rotation = None
    if rot_ids:
        rotation = {}
        for v, ids in rot_ids.items():
            order = []
            for i in ids:
                if not 0 <= i < len(edges):
                    raise ParseError(f"rotation of {v} names edge {i}, which does not exist", 0, source)
                a, b = edges[i]
                if v not in (a, b):
                    raise ParseError(f"edge {i} is not incident to {v}", 0, source)
                order.append(b if a == v else a)
            rotation[v] = order
    try:
        return PlanarGraph(n, tuple((min(u, v), max(u, v)) for u, v in edges), rotation)
    except ValidationError as exc:
        raise ParseError(str(exc), 0, source) from None


# -------------------------------------------------------------- generators

def path_graph(n: int) -> PlanarGraph:
    return PlanarGraph(n, tuple((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> PlanarGraph:
    return PlanarGraph(n, tuple(sorted((min(i, (i + 1) % n), max(i, (i + 1) % n)) for i in range(n))))


def star_graph(leaves: int) -> PlanarGraph:
    return PlanarGraph(leaves + 1, tuple((0, i) for i in range(1, leaves + 1)))


def wheel_graph(rim: int) -> PlanarGraph:
    es = {(0, i) for i in range(1, rim + 1)}
    es |= {tuple(sorted((i, i % rim + 1))) for i in range(1, rim + 1)}
    return PlanarGraph(rim + 1, tuple(sorted(es)))


def complete_graph(n: int) -> PlanarGraph:
    return PlanarGraph(n, tuple((u, v) for u in range(n) for v in range(u + 1, n)))


def grid_graph(rows: int, cols: int) -> PlanarGraph:
    es = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                es.append((v, v + 1))
            if r + 1 < rows:
                es.append((v, v + cols))
    return PlanarGraph(rows * cols, tuple(sorted(es)))


def random_triangulation(n: int, rng: np.random.Generator) -> PlanarGraph:
    """Delaunay triangulation of n uniform points in the unit square."""
    if n < 3:
        return path_graph(n)
    pts = rng.random((n, 2))
    tri = Delaunay(pts)
    es = set()
    for a, b, c in tri.simplices:
        for u, v in ((a, b), (b, c), (a, c)):
            es.add((int(min(u, v)), int(max(u, v))))
    return PlanarGraph(n, tuple(sorted(es)))


def random_planar(n: int, rng: np.random.Generator, keep: float = 0.7) -> PlanarGraph:
    """A Delaunay triangulation with each edge kept with probability keep."""
    base = random_triangulation(n, rng)
    es = tuple(e for e in base.edges if rng.random() < keep)
    return PlanarGraph(n, es)
