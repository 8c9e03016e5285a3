import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ntisp.errors import ValidationError
from ntisp.sublinear import graphstream as gs, planar, septree
from ntisp.sublinear.septree import build_separating_tree

import graph_corpus

CORPUS = sorted(graph_corpus.graphs().items())


def _tree(g):
    return build_separating_tree(g)


def test_triangle():
    g = planar.cycle_graph(3)
    res = gs.stream_3color(g, _tree(g), "search")
    assert res.verdict == gs.SAT and res.peak_live == 3


def test_k4_unsat():
    g = planar.complete_graph(4)
    assert gs.stream_3color(g, _tree(g), "search").verdict == gs.UNSAT


def test_vc_examples():
    e = planar.path_graph(2)
    assert gs.stream_vertex_cover(e, _tree(e), 1, "search").verdict == gs.SAT
    t = planar.cycle_graph(3)
    assert gs.stream_vertex_cover(t, _tree(t), 1, "search").verdict == gs.UNSAT
    assert gs.stream_vertex_cover(t, _tree(t), 2, "search").verdict == gs.SAT


def test_verify_reports_conflicts():
    g = planar.cycle_graph(4)
    tree = _tree(g)
    res = gs.stream_3color(g, tree, "verify", [0, 0, 1, 2])
    assert res.verdict == gs.UNSAT and "monochromatic" in res.reason
    res = gs.stream_vertex_cover(g, tree, 2, "verify", [1, 0, 0, 1])
    assert res.verdict == gs.UNSAT and "uncovered" in res.reason
    res = gs.stream_vertex_cover(g, tree, 1, "verify", [1, 0, 1, 0])
    assert res.verdict == gs.UNSAT and "exceeds" in res.reason


def test_bad_certificates_and_trees():
    g = planar.cycle_graph(4)
    tree = _tree(g)
    with pytest.raises(ValidationError):
        gs.stream_3color(g, tree, "verify", [0, 1, 3, 1])
    with pytest.raises(ValidationError):
        gs.stream_vertex_cover(g, tree, 2, "verify", [1, 0])
    other = _tree(planar.path_graph(4))
    with pytest.raises(ValidationError):
        gs.stream_3color(planar.PlanarGraph(4, ((0, 3),)), septree.SeparatingTree(
            septree.TreeNode((1,), [septree.TreeNode((0,), [], True),
                                    septree.TreeNode((2, 3), [], True)]), 4), "search")
    assert gs.stream_3color(planar.path_graph(4), other, "search").verdict == gs.SAT


@pytest.mark.parametrize("name,g", CORPUS)
def test_corpus_oracle_agreement(name, g):
    tree = _tree(g)
    bound = septree.K_BRANCH * math.sqrt(max(g.n, 1)) + septree.leaf_threshold(max(g.n, 1))
    col = gs.three_colorable(g)
    res = gs.stream_3color(g, tree, "search")
    assert (res.verdict == gs.SAT) == (col is not None)
    assert res.peak_live <= bound
    if col is not None:
        assert gs.stream_3color(g, tree, "verify", res.certificate).verdict == gs.SAT
        assert gs.stream_3color(g, tree, "verify", col).verdict == gs.SAT
    k = gs.min_vertex_cover(g)
    assert gs.stream_vertex_cover(g, tree, k, "search").verdict == gs.SAT
    if k:
        assert gs.stream_vertex_cover(g, tree, k - 1, "search").verdict == gs.UNSAT
    cover = gs.stream_vertex_cover(g, tree, k, "search").certificate
    assert sum(cover) == k
    assert gs.stream_vertex_cover(g, tree, k, "verify", cover).verdict == gs.SAT


def test_peak_is_at_most_heaviest_branch():
    g = planar.random_triangulation(200, np.random.default_rng(3))
    tree = _tree(g)
    res = gs.stream_vertex_cover(g, tree, g.n, "verify", [1] * g.n)
    assert res.verdict == gs.SAT
    assert res.peak_live == tree.max_branch_weight()


def test_full_pass_walks_the_whole_tree():
    g = planar.random_triangulation(100, np.random.default_rng(5))
    tree = _tree(g)
    res = gs.stream_3color(g, tree, "verify", [0] * g.n, full_pass=True)
    assert res.verdict == gs.UNSAT and res.peak_live == tree.max_branch_weight()


@given(st.integers(2, 11), st.integers(0, 2 ** 32 - 1))
def test_search_agrees_with_oracles(n, seed):
    g = planar.random_planar(n, np.random.default_rng(seed), 0.6)
    tree = _tree(g)
    assert (gs.stream_3color(g, tree, "search").verdict == gs.SAT) == (gs.three_colorable(g) is not None)
    k = gs.min_vertex_cover(g)
    assert gs.stream_vertex_cover(g, tree, k, "search").verdict == gs.SAT
