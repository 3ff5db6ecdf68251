from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from cubeperc import combinatorics as cb
from cubeperc.hypercube import edge_boundary, harper_bound


def cube_edges(d):
    return [(v, v | 1 << i) for v in range(1 << d) for i in range(d) if not v >> i & 1]


def brute_forests(d, roots, k):
    """Count k-edge subsets that are forests covering roots with every tree touching roots."""
    edges = cube_edges(d)
    n = 1 << d
    total = 0
    for sub in combinations(edges, k):
        verts = set(roots) | {x for e in sub for x in e}
        idx = {v: i for i, v in enumerate(sorted(verts))}
        m = len(verts)
        if m - len(sub) <= 0:
            continue
        r = [idx[a] for a, _ in sub]
        c = [idx[b] for _, b in sub]
        ncomp, lab = connected_components(coo_matrix((np.ones(k), (r, c)), shape=(m, m)), directed=False)
        if ncomp != m - k:  # a cycle somewhere
            continue
        if {lab[idx[u]] for u in roots} == set(range(ncomp)):
            total += 1
    return total


@pytest.mark.parametrize("d,k", [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3), (3, 4), (4, 3)])
def test_subtrees_match_bruteforce(d, k):
    assert cb.count_rooted_subtrees(d, 0, k) == brute_forests(d, [0], k - 1)


@pytest.mark.parametrize("roots,k", [([0, 7], 0), ([0, 7], 1), ([0, 7], 2), ([0, 7], 3), ([0, 1], 2), ([0, 1], 3)])
def test_forests_match_bruteforce(roots, k):
    assert cb.count_forests(3, roots, k) == brute_forests(3, roots, k)


def test_hand_values_and_guards():
    assert [cb.count_rooted_subtrees(d, 0, 1) for d in (1, 2, 3, 4)] == [1, 1, 1, 1]
    assert [cb.count_rooted_subtrees(d, 0, 2) for d in (1, 2, 3, 4)] == [1, 2, 3, 4]
    assert cb.count_rooted_subtrees(3, 0, 3) == 9
    assert cb.count_forests(3, [0, 7], 0) == 1
    assert cb.count_forests(3, [0, 7], 2) <= 72
    with pytest.raises(ValueError):
        cb.count_rooted_subtrees(5, 0, 3)
    with pytest.raises(ValueError):
        cb.count_forests(3, [0, 1, 2], 1)
    with pytest.raises(ValueError):
        cb.count_forests(3, [], 1)


def test_harper_exhaustive():
    for d in (2, 3, 4):
        r = cb.harper_check_exhaustive(d)
        assert r.violations == 0 and r.min_slack == 0
        assert r.subsets_checked == 2 ** (2**d) - 1
        # the zero-slack sets are exactly the subcubes: sum over k of C(d,k) 2^(d-k) = 3^d
        assert r.zero_slack_sets == 3**d
        s = r.attaining_set
        assert edge_boundary(s, d) == pytest.approx(harper_bound(len(s), d))
    with pytest.raises(ValueError):
        cb.harper_check_exhaustive(5)


def random_tree(n, rng, max_degree):
    deg = [0] * n
    edges = []
    for v in range(1, n):
        u = int(rng.choice([u for u in range(v) if deg[u] < max_degree]))
        deg[u] += 1
        deg[v] += 1
        edges.append((u, v))
    return edges


def test_decompose_examples():
    path = cb.WeightedTree.from_edges([(i, i + 1) for i in range(4)], {i: 1.0 for i in range(5)})
    parts = cb.decompose_weighted_tree(path, 2.0, 2)
    assert sorted(v for p in parts for v in p) == list(range(5))
    assert all(2 <= path.total(p) <= 6 for p in parts)
    single = cb.WeightedTree.from_edges([], {0: 3.0})
    assert cb.decompose_weighted_tree(single, 3.0) == [[0]]
    star = cb.WeightedTree.from_edges([(0, i) for i in range(1, 5)], {i: 2.0 for i in range(5)})
    assert all(2 <= star.total(p) <= 10 for p in cb.decompose_weighted_tree(star, 2.0, 4))


@settings(max_examples=150, deadline=None)
@given(n=st.integers(1, 40), delta=st.integers(1, 5), seed=st.integers(0, 2**32 - 1), m0=st.floats(0.5, 4))
def test_decompose_invariant(n, delta, seed, m0):
    rng = np.random.default_rng(seed)
    if delta == 1:
        n = min(n, 2)
    weight = {v: float(rng.uniform(0.05, 1.0)) * m0 for v in range(n)}
    tree = cb.WeightedTree.from_edges(random_tree(n, rng, delta), weight)
    if tree.total() < m0:
        with pytest.raises(ValueError):
            cb.decompose_weighted_tree(tree, m0, delta)
        return
    parts = cb.decompose_weighted_tree(tree, m0, delta)  # checks the invariant itself
    for p in parts:
        assert m0 - 1e-9 <= tree.total(p) <= (delta + 1) * m0 + 1e-9
        assert tree.connected(p)


def test_decompose_rejects_bad_input():
    t = cb.WeightedTree.from_edges([(0, 1)], {0: 1.0, 1: 5.0})
    with pytest.raises(ValueError):
        cb.decompose_weighted_tree(t, 2.0)
    cyc = cb.WeightedTree.from_edges([(0, 1), (1, 2), (2, 0)], {0: 1.0, 1: 1.0, 2: 1.0})
    with pytest.raises(ValueError):
        cb.decompose_weighted_tree(cyc, 1.0)


def test_family_edge_identity():
    rng = np.random.default_rng(1)
    d = 8
    perm = rng.permutation(1 << d)
    sets = [set(perm[i : i + 5].tolist()) for i in range(0, 100, 5)]
    fam = cb.DisjointSetFamily(d, sets)
    assert fam.boundary_sum() == fam.e_out + 2 * fam.e_in
    with pytest.raises(ValueError):
        cb.DisjointSetFamily(d, [{1, 2}, {2, 3}])


def test_sparsify_singletons():
    d, eps = 10, 0.1
    fam = cb.DisjointSetFamily(d, [{v} for v in range(1 << d)])
    sub = cb.sparsify_family(fam, eps, seed=2)
    assert sub.volume >= eps * fam.volume
    assert sub.e_out >= (1 - 2 * eps) * d * sub.volume
    assert set().union(*sub.sets) <= set(range(1 << d))


def test_sparsify_single_set_and_failures():
    d = 6
    whole = cb.DisjointSetFamily(d, [set(range(1 << d))])
    with pytest.raises(cb.SparsificationFailed):
        cb.sparsify_family(whole, 0.3, seed=0)
    lone = cb.DisjointSetFamily(d, [{0}])
    assert cb.sparsify_family(lone, 0.9, seed=0, keep_rate=1.0).sets == lone.sets
    with pytest.raises(ValueError):
        cb.sparsify_family(cb.DisjointSetFamily(d, []), 0.1, seed=0)
    with pytest.raises(cb.SparsificationFailed):
        cb.sparsify_family(lone, 0.1, seed=0, min_volume=10)


def test_sequences_uniform_multiset():
    rng = np.random.default_rng(0)
    seqs = cb.sample_sequences(5, 3, 1000, rng)
    assert seqs.shape == (1000, 15)
    assert np.all(np.sort(seqs, axis=1) == np.repeat(np.arange(5), 3))
    # first position uniform over symbols
    counts = np.bincount(seqs[:, 0], minlength=5)
    assert counts.min() > 150


def test_statistics_against_loops():
    rng = np.random.default_rng(3)
    seqs = cb.sample_sequences(7, 3, 50, rng)
    f = cb.DistinctInPrefix(7, 10)
    g = cb.SingletonsInWindow(7, 4, 9)
    for row, a, b in zip(seqs, f(seqs), g(seqs)):
        assert a == len(set(row[:10]))
        win = list(row[4:13])
        assert b == sum(win.count(s) == 1 for s in set(win))


def test_switching_concentration():
    r = cb.mc_switching_concentration(cb.DistinctInPrefix(30, 45), 1, 3, 30, None, 10**5, seed=4)
    assert r.passed and r.max_jump <= 1
    r2 = cb.mc_switching_concentration(cb.SingletonsInWindow(30, 10, 30), 2, 3, 30, None, 10**5, seed=5)
    assert r2.passed and r2.max_jump <= 2
    r0 = cb.mc_switching_concentration(cb.Constant(4.0), 0, 3, 10, 0.5, 1000, seed=6)
    assert r0.tail == 0
    with pytest.raises(cb.LipschitzCertificateFailed):
        cb.mc_switching_concentration(cb.SingletonsInWindow(30, 10, 30), 1, 3, 30, None, 100, seed=7)


def test_sparsify_feasibility_tracks_internal_edges():
    # a pair {v, v^1} has d - 1 outside edges per vertex, so it needs eps >= 1/(2d)
    d = 10
    pairs = cb.DisjointSetFamily(d, [{v, v ^ 1} for v in range(0, 1 << d, 2)])
    r = cb.sparsification_feasibility(pairs, [0.02, 0.04, 0.08, 0.2], seed=0)
    assert r == {0.02: False, 0.04: False, 0.08: True, 0.2: True}
    singles = cb.DisjointSetFamily(d, [{v} for v in range(1 << d)])
    assert all(cb.sparsification_feasibility(singles, [0.02, 0.1, 0.4], seed=0).values())
