"""Graph core: components, neighborhoods, co-components, induced paths."""

import random

import pytest

from p6carve.graphs import (DEFAULT_VERTEX_CAP, Graph, GraphFormatError,
                            SizeCapError, closed_neighborhood,
                            complement_graph, co_components,
                            connected_components, induced_subgraph,
                            is_connected_mask, is_mesh_mask, is_pt_free,
                            iter_bits, mask_of, open_neighborhood, set_of)
from .common import complete_graph, cycle_graph, path_graph, rand_graph, star_graph


def test_construction_rejects_bad_input():
    with pytest.raises(GraphFormatError):
        Graph(3, [(1, 1)])
    with pytest.raises(GraphFormatError):
        Graph(3, [(0, 3)])
    with pytest.raises(GraphFormatError):
        Graph(-1)
    with pytest.raises(SizeCapError):
        Graph(DEFAULT_VERTEX_CAP + 1)


def test_mask_helpers_roundtrip():
    assert mask_of([0, 2, 5]) == 0b100101
    assert list(iter_bits(0b100101)) == [0, 2, 5]
    assert set_of(0b100101) == frozenset({0, 2, 5})
    assert mask_of([]) == 0


def test_connected_components_examples():
    c4 = cycle_graph(4)
    assert connected_components(c4, {0, 2}) == [frozenset({1}), frozenset({3})]
    p4 = path_graph(4)
    assert connected_components(p4) == [frozenset({0, 1, 2, 3})]
    k13 = star_graph(3)
    assert connected_components(k13, {0}) == [frozenset({1}), frozenset({2}),
                                              frozenset({3})]


def test_closed_neighborhood_examples():
    c4 = cycle_graph(4)
    assert closed_neighborhood(c4, {0}) == frozenset({3, 0, 1})
    assert closed_neighborhood(c4, set()) == frozenset()
    k13 = star_graph(3)
    assert closed_neighborhood(k13, {1}) == frozenset({0, 1})
    assert open_neighborhood(k13, {1}) == frozenset({0})


def test_co_components_examples():
    edge = Graph(2, [(0, 1)])
    assert co_components(edge, {0, 1}) == [frozenset({0}), frozenset({1})]
    assert is_mesh_mask(edge, 0b11)
    p3 = path_graph(3)
    assert co_components(p3, {0, 1, 2}) == [frozenset({0, 2}), frozenset({1})]
    assert co_components(p3, {1}) == [frozenset({1})]
    assert not is_mesh_mask(p3, 0b010)
    assert not is_mesh_mask(p3, 0)


def test_is_pt_free_examples():
    assert is_pt_free(cycle_graph(6), 6)
    assert not is_pt_free(path_graph(6), 6)
    assert not is_pt_free(cycle_graph(6), 5)
    assert is_pt_free(complete_graph(4), 3)
    assert not is_pt_free(complete_graph(4), 2)


def test_is_pt_free_degenerate_t():
    g = path_graph(3)
    assert not is_pt_free(g, 1)       # any vertex is an induced P1
    assert is_pt_free(Graph(0), 1)
    assert is_pt_free(Graph(3), 2)    # edgeless graph has no P2


def test_components_partition_invariant():
    rng = random.Random(1)
    for _ in range(60):
        n = rng.randint(0, 9)
        g = rand_graph(rng, n, rng.random())
        removed = {v for v in range(n) if rng.random() < 0.3}
        comps = connected_components(g, removed)
        union = set()
        for c in comps:
            assert c, "components must be nonempty"
            assert not union & c, "components must be disjoint"
            union |= c
            assert is_connected_mask(g, mask_of(c))
        assert union == set(range(n)) - removed
        # no edge joins two distinct components
        for i, a in enumerate(comps):
            for b in comps[i + 1:]:
                for u in a:
                    assert not g.adj[u] & mask_of(b)
        # deterministic order by minimum vertex
        mins = [min(c) for c in comps]
        assert mins == sorted(mins)


def test_co_components_match_complement_components():
    rng = random.Random(2)
    for _ in range(60):
        n = rng.randint(1, 8)
        g = rand_graph(rng, n, rng.random())
        s = {v for v in range(n) if rng.random() < 0.6}
        sub, order = induced_subgraph(complement_graph(g), sorted(s))
        expect = sorted(frozenset(order[v] for v in c)
                        for c in connected_components(sub))
        assert sorted(co_components(g, s)) == expect


def test_pt_freeness_monotone_in_t():
    rng = random.Random(3)
    for _ in range(40):
        n = rng.randint(1, 8)
        g = rand_graph(rng, n, rng.random())
        free = [is_pt_free(g, t) for t in range(1, n + 2)]
        for a, b in zip(free, free[1:]):
            assert not a or b, "P_t-free must imply P_{t+1}-free"
        assert free[-1], "no induced path can use more than n vertices"
