"""Separating trees: recursive separator decompositions in which every edge
stays inside one node or along one root-to-leaf branch."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import NtispError
from .planar import PlanarGraph
from .separator import separate_nx

K_BRANCH = 19.0


@dataclass
class TreeNode:
    vertices: tuple
    children: list = field(default_factory=list)
    leaf: bool = False


@dataclass
class SeparatingTree:
    root: TreeNode
    n: int

    def nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def branches(self):
        """Each root-to-leaf branch as a list of nodes."""
        out = []
        stack = [(self.root, [self.root])]
        while stack:
            node, path = stack.pop()
            if not node.children:
                out.append(path)
            for ch in reversed(node.children):
                stack.append((ch, path + [ch]))
        return out

    def depth(self) -> int:
        return max(len(b) for b in self.branches()) - 1

    def max_branch_weight(self) -> int:
        return max(sum(len(x.vertices) for x in b) for b in self.branches())


def leaf_threshold(n: int) -> int:
    """ceil(2*sqrt(2)*sqrt(n)), computed exactly."""
    t = math.isqrt(8 * n)
    return t if t * t == 8 * n else t + 1


def build_separating_tree(g: PlanarGraph) -> SeparatingTree:
    g.embedding()  # rejects non-planar input
    G = g.nx()
    limit = leaf_threshold(g.n)

    def build(vs: set) -> TreeNode:
        if len(vs) <= limit:
            return TreeNode(tuple(sorted(vs)), [], True)
        A, B, C = separate_nx(G.subgraph(vs))
        node = TreeNode(tuple(sorted(C)))
        node.children = [build(part) for part in (A, B) if part]
        if not node.children:
            node.leaf = True
        return node

    tree = SeparatingTree(build(set(range(g.n))), g.n)
    problems = validate_tree(g, tree)
    if problems:
        raise NtispError("separating tree failed validation: " + "; ".join(problems))
    return tree


def validate_tree(g: PlanarGraph, tree: SeparatingTree) -> list:
    """Independent check of the tree invariants; returns the problems."""
    problems = []
    owner = {}
    ancestors = {}
    stack = [(tree.root, ())]
    leaves = []
    while stack:
        node, above = stack.pop()
        key = id(node)
        ancestors[key] = set(above)
        for v in node.vertices:
            if v in owner:
                problems.append(f"vertex {v} appears in two nodes")
            owner[v] = key
        if not node.children:
            leaves.append(node)
        for ch in node.children:
            stack.append((ch, above + (key,)))
    if set(owner) != set(range(g.n)):
        problems.append("node subsets do not cover V")
    for u, v in g.edges:
        a, b = owner.get(u), owner.get(v)
        if a is None or b is None:
            continue
        if not (a == b or a in ancestors[b] or b in ancestors[a]):
            problems.append(f"edge ({u},{v}) crosses branches")
            break
    limit = leaf_threshold(g.n)
    for leaf in leaves:
        if len(leaf.vertices) > limit:
            problems.append(f"leaf of size {len(leaf.vertices)} exceeds {limit}")
            break
    if g.n > 1:
        depth_cap = math.ceil(math.log(g.n, 1.5)) + 2
        if tree.depth() > depth_cap:
            problems.append(f"depth {tree.depth()} exceeds {depth_cap}")
    w = tree.max_branch_weight()
    if w * w > K_BRANCH * K_BRANCH * g.n:
        problems.append(f"branch weight {w} exceeds {K_BRANCH}*sqrt(n)")
    return problems


def dump_tree(tree: SeparatingTree) -> dict:
    def enc(node):
        return {"vertices": list(node.vertices), "children": [enc(c) for c in node.children]}
    return enc(tree.root)
