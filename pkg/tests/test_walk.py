import math
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from cubeperc.components import label_components
from cubeperc.graph import ComponentGraph
from cubeperc.percolation import PercolationSample
from cubeperc.walk import (
    WalkDistribution, WalkError, bfs_prefix_order, conductance, estimate_mixing, expansion_scan, lazy_step, n_scales,
    phi_profile, prefix_cuts, sample_starts, stationary, tv_distance,
)


@pytest.fixture(scope="module")
def giant12():
    s = PercolationSample.make(12, 2.0, 3)
    return ComponentGraph.from_sample(s, label_components(s).giant_vertices())


EDGE = ComponentGraph.from_edges(2, [(0, 1)])
PATH3 = ComponentGraph.from_edges(3, [(0, 1), (1, 2)])


def test_stationary_examples():
    assert stationary(EDGE).probs.tolist() == [0.5, 0.5]
    assert stationary(PATH3).probs.tolist() == [0.25, 0.5, 0.25]
    cube = ComponentGraph.from_sample(PercolationSample.with_p(5, 1.0, 0), np.arange(32))
    assert np.allclose(stationary(cube).probs, 1 / 32)
    with pytest.raises(ValueError):
        stationary(ComponentGraph.from_edges(0, []))


def test_lazy_step_examples(backend, giant12):
    nu = lazy_step(EDGE, WalkDistribution(np.array([1.0, 0.0])))
    assert nu.probs.tolist() == [0.5, 0.5] and nu.t == 1
    pi = stationary(giant12)
    assert np.abs(lazy_step(giant12, pi).probs - pi.probs).max() <= 1e-12
    mu = np.random.default_rng(0).random(giant12.m)
    mu = WalkDistribution(mu / mu.sum())
    nu = lazy_step(giant12, mu)
    assert abs(nu.probs.sum() - 1) < 1e-12
    assert tv_distance(nu, pi) <= tv_distance(mu, pi) + 1e-15


def test_tv_examples():
    assert tv_distance([1, 0], [1, 0]) == 0
    assert tv_distance([1, 0], [0, 1]) == 1
    assert tv_distance([0.5, 0.5], [1, 0]) == 0.5
    with pytest.raises(ValueError):
        tv_distance([1.0], [0.5, 0.5])


def test_reversibility_exact(giant12):
    # pi(u) P(u,v) = deg u/2e * 1/(2 deg u) is the same for both orientations
    rng = np.random.default_rng(0)
    deg = giant12.degrees
    rows = giant12.edge_rows()
    E = giant12.n_edges
    for i in rng.integers(0, len(rows), 10**4):
        u, v = int(rows[i]), int(giant12.indices[i])
        assert Fraction(int(deg[u]), 2 * E) * Fraction(1, 2 * int(deg[u])) == Fraction(int(deg[v]), 2 * E) * Fraction(1, 2 * int(deg[v]))


def test_mixing_examples(backend):
    assert estimate_mixing(EDGE, [0, 1], 5).t_mix == 1
    cube = ComponentGraph.from_sample(PercolationSample.with_p(8, 1.0, 0), np.arange(256))
    t = estimate_mixing(cube, [0], 10**4).t_mix
    assert 8 / 2 <= t <= 10 * 8 * math.log(8)
    est = estimate_mixing(PATH3, [0], 1, threshold=1e-9)
    assert est.not_mixed and est.curves.shape == (1, 2)
    with pytest.raises(ValueError):
        estimate_mixing(EDGE, [5], 3)


def test_mixing_against_dense_matrix_power():
    s = PercolationSample.make(8, 2.0, 1)
    g = ComponentGraph.from_sample(s, label_components(s).giant_vertices())
    A = np.zeros((g.m, g.m))
    A[g.edge_rows(), g.indices] = 1
    P = 0.5 * np.eye(g.m) + 0.5 * A / g.degrees[:, None]
    pi = stationary(g).probs
    est = estimate_mixing(g, [0, 3], 10**4)
    Pt = np.eye(g.m)
    for t in range(est.t_mix + 1):
        tv = 0.5 * np.abs(Pt[[0, 3]] - pi).sum(axis=1)
        np.testing.assert_allclose(tv, est.curves[:, t], atol=1e-10)
        Pt = Pt @ P


def test_sample_starts(giant12):
    st = sample_starts(giant12, 8, seed=1)
    assert len(st) >= 1 and st.max() < giant12.m
    un = sample_starts(giant12, 8, seed=1, strategy="uniform")
    assert len(un) == 8
    with pytest.raises(ValueError):
        sample_starts(giant12, 8, 1, strategy="worst")


def test_conductance_examples(giant12):
    r = conductance(EDGE, [0])
    assert (r.pi_S, r.Q_S, r.phi_S) == (0.5, 0.25, 1.0)
    order = bfs_prefix_order(giant12, 0, np.random.default_rng(0))
    mask = np.zeros(giant12.m, dtype=bool)
    mask[order[:500]] = True
    a, b = conductance(giant12, mask), conductance(giant12, ~mask)
    assert a.phi_exact == b.phi_exact
    assert 0 < a.phi_S < 1
    # second route: networkx cut and volume
    G = nx.Graph()
    G.add_edges_from(zip(giant12.edge_rows().tolist(), giant12.indices.tolist()))
    S = set(np.flatnonzero(mask).tolist())
    cut, vol, E = nx.cut_size(G, S), nx.volume(G, S), G.number_of_edges()
    assert a.phi_exact == Fraction(cut * E, vol * (2 * E - vol))
    with pytest.raises(ValueError):
        conductance(EDGE, [])


def test_prefixes_connected_and_counts(giant12):
    order = bfs_prefix_order(giant12, 5, np.random.default_rng(2))
    cut, vol = prefix_cuts(giant12, order)
    G = nx.Graph(list(zip(giant12.edge_rows().tolist(), giant12.indices.tolist())))
    for L in (1, 2, 17, 300, giant12.m // 2):
        S = order[:L].tolist()
        assert nx.is_connected(G.subgraph(S))
        assert cut[L] == nx.cut_size(G, S) and vol[L] == nx.volume(G, S)


def test_phi_profile(giant12):
    prof = phi_profile(EDGE, 0)
    assert prof.scales == {1: 1.0} and prof.inverse_square_sum == 1.0
    p = phi_profile(giant12, 0, sets_per_scale=8)
    assert set(p.scales) == set(range(1, n_scales(giant12) + 1))
    assert all(0 < v <= 1 or j in p.sweep for j, v in p.scales.items())
    assert p.inverse_square_sum >= len(p.scales)


def test_expansion_examples(giant12):
    d = 6
    cube = ComponentGraph.from_sample(PercolationSample.with_p(d, 1.0, 0), np.arange(2**d))
    for k in range(0, d):
        mask = np.zeros(2**d, dtype=bool)
        mask[: 2**k] = True
        assert d * cube.boundary(mask) / 2**k == d * (d - k)
    rep = expansion_scan(EDGE, 7, [1], 3, seed=0, large_delta=None)
    assert rep.per_size == {1: 7.0}
    rep = expansion_scan(giant12, 12, [16, 64, 256, giant12.m], 4, seed=0)
    assert rep.global_min > 0 and rep.skipped == [giant12.m]
