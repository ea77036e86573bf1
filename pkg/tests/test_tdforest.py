"""Treedepth structures: validity, neatness, maximality, tie-breaking."""

import itertools
import random

import pytest

from p6carve.graphs import Graph, SizeCapError, mask_of, set_of
from p6carve.tdforest import (BETTER, TIE, WORSE, PartialSolution,
                              RootedForest, TreedepthStructure, all_structures,
                              appendable_mask, compare_solutions,
                              enumerate_maximal_structures, is_maximal,
                              is_neat, neatify, set_order_key,
                              solution_order_key, structure_order_key,
                              validate_structure)
from .common import (complete_graph, cycle_graph, neat_by_definition,
                     path_graph, rand_graph, rand_structure, rand_weights)


def tds(parent, d):
    return TreedepthStructure.from_parent(parent, d)


def test_rooted_forest_basics():
    f = RootedForest({0: None, 1: 0, 2: 1, 3: 0, 4: None})
    assert f.roots == [0, 4]
    assert f.depth == {0: 1, 1: 2, 2: 3, 3: 2, 4: 1}
    assert f.height == 3
    assert f.subtree_mask(1) == mask_of([1, 2])
    assert f.anc_incl[2] == mask_of([0, 1, 2])
    assert f.depth_level_mask(2) == mask_of([1, 3])
    assert f.ancestor_at_depth(2, 1) == 0
    assert f.ancestor_at_depth(2, 3) == 2
    assert f.restrict(mask_of([0, 1, 4])).parent == {0: None, 1: 0, 4: None}
    with pytest.raises(ValueError):
        f.restrict(mask_of([1, 2]))
    with pytest.raises(ValueError):
        RootedForest({0: 1, 1: 0})
    with pytest.raises(ValueError):
        RootedForest({0: 5})


def test_validate_structure_examples():
    c4 = cycle_graph(4)
    assert validate_structure(c4, tds({0: None}, 1))
    assert not validate_structure(c4, tds({0: None, 1: None}, 1))
    p3 = path_graph(3)
    assert validate_structure(p3, tds({1: None, 0: 1, 2: 1}, 2))
    # height exceeding d fails even when comparability holds
    assert not validate_structure(p3, tds({0: None, 1: 0}, 1))


def test_neatify_examples():
    p3 = path_graph(3)
    t = tds({0: None, 1: 0, 2: 1}, 3)
    assert neatify(p3, t) == t
    assert neat_by_definition(p3, t)

    two_isolated = Graph(2)
    t2 = neatify(two_isolated, tds({0: None, 1: 0}, 2))
    assert t2.forest.parent == {0: None, 1: None}

    # skipping a level: leaf attached below a nonadjacent middle vertex
    g = Graph(3, [(0, 1), (0, 2)])
    t3 = neatify(g, tds({0: None, 1: 0, 2: 1}, 3))
    assert t3.forest.parent == {0: None, 1: 0, 2: 0}
    assert neat_by_definition(g, t3)


def test_neatify_invariants_random():
    rng = random.Random(11)
    for _ in range(120):
        n = rng.randint(1, 8)
        g = rand_graph(rng, n, rng.random())
        t = rand_structure(rng, g, rng.randint(1, 3))
        assert validate_structure(g, t)
        t2 = neatify(g, t)
        assert validate_structure(g, t2)
        assert t2.nodes_mask == t.nodes_mask
        for v in t2.forest.parent:
            assert t2.forest.depth[v] <= t.forest.depth[v]
        assert is_neat(g, t2)
        assert neat_by_definition(g, t2)
        # the fast parent-edge form agrees with the literal definition
        assert is_neat(g, t) == neat_by_definition(g, t)


def test_is_maximal_examples():
    c4 = cycle_graph(4)
    assert not is_maximal(c4, tds({0: None}, 1))
    assert is_maximal(c4, tds({0: None, 2: None}, 1))
    k3 = complete_graph(3)
    assert is_maximal(k3, tds({0: None, 1: 0}, 2))
    assert appendable_mask(c4, tds({0: None}, 1)) == mask_of([2])


def test_enumerate_maximal_structures_examples():
    c4 = cycle_graph(4)
    got = {t.forest.key for t in enumerate_maximal_structures(c4, 1)}
    assert got == {((0, -1), (2, -1)), ((1, -1), (3, -1))}

    k1 = Graph(1)
    assert [t.forest.parent for t in enumerate_maximal_structures(k1, 1)] \
        == [{0: None}]

    p3 = path_graph(3)
    got = {frozenset(t.forest.parent) for t in enumerate_maximal_structures(p3, 1)}
    assert got == {frozenset({0, 2}), frozenset({1})}

    with pytest.raises(SizeCapError):
        list(enumerate_maximal_structures(Graph(13), 1))


def test_enumeration_is_exhaustive_and_duplicate_free():
    rng = random.Random(13)
    for _ in range(25):
        n = rng.randint(1, 6)
        g = rand_graph(rng, n, rng.random())
        d = rng.randint(1, 3)
        seen = [t.forest.key for t in all_structures(g, d)]
        assert len(seen) == len(set(seen))
        for key in seen:
            t = tds({v: (None if p == -1 else p) for v, p in key}, d)
            assert validate_structure(g, t)
        maximal = [t.forest.key for t in enumerate_maximal_structures(g, d)]
        assert len(maximal) == len(set(maximal))
        expect = {k for k in seen
                  if is_maximal(g, tds({v: (None if p == -1 else p)
                                        for v, p in k}, d))}
        assert set(maximal) == expect
        # maximal structures of depth bound 1 are maximal independent sets
        if d == 1:
            for key in maximal:
                nodes = [v for v, _ in key]
                for u in nodes:
                    for w in nodes:
                        assert u == w or not g.has_edge(u, w)
                out = set(range(n)) - set(nodes)
                for u in out:
                    assert g.adj[u] & mask_of(nodes)


def test_set_order_key():
    # larger sets first, then lexicographic by smallest differing index
    assert set_order_key(mask_of([0, 1])) < set_order_key(mask_of([5]))
    assert set_order_key(mask_of([0, 3])) < set_order_key(mask_of([1, 2]))
    assert set_order_key(mask_of([1, 2])) < set_order_key(mask_of([1, 3]))
    assert set_order_key(0) > set_order_key(mask_of([4]))


def test_compare_solutions_examples():
    g = path_graph(4)
    w = [1, 1, 1, 1]
    t_a = tds({0: None, 2: None}, 1)
    a = PartialSolution(t_a, mask_of([0, 2]), mask_of([0, 2]))
    t_b = tds({1: None, 3: None}, 1)
    b = PartialSolution(t_b, mask_of([1]), mask_of([1, 3]))
    assert compare_solutions(a, b, [5, 3, 5, 3]) == BETTER     # weight 10 vs 3
    assert compare_solutions(b, a, [5, 3, 5, 3]) == WORSE
    assert compare_solutions(a, a, w) == TIE

    # equal weights: X = {0} beats X = {1}
    ta = tds({0: None}, 1)
    tb = tds({1: None}, 1)
    pa = PartialSolution(ta, 0b0001, 0b0001)
    pb = PartialSolution(tb, 0b0010, 0b0010)
    assert compare_solutions(pa, pb, w) == BETTER


def test_compare_solutions_is_total_quasi_order():
    rng = random.Random(17)
    g = rand_graph(rng, 6, 0.4)
    w = rand_weights(rng, 6, 3)
    pool = []
    for _ in range(40):
        t = rand_structure(rng, g, 2)
        nodes = t.nodes_mask
        sol = nodes & rng.getrandbits(6)
        x = sol & rng.getrandbits(6)
        pool.append(PartialSolution(t, x, sol))
    for a, b in itertools.product(pool, repeat=2):
        r1 = compare_solutions(a, b, w)
        r2 = compare_solutions(b, a, w)
        assert (r1, r2) in {(BETTER, WORSE), (WORSE, BETTER), (TIE, TIE)}
    for a, b, c in itertools.islice(itertools.product(pool, repeat=3), 4000):
        if compare_solutions(a, b, w) != WORSE and \
           compare_solutions(b, c, w) != WORSE:
            assert compare_solutions(a, c, w) != WORSE


def test_neat_tie_implies_identical():
    # equal structure-order data on neat structures forces equal parent maps
    rng = random.Random(19)
    for _ in range(30):
        n = rng.randint(2, 6)
        g = rand_graph(rng, n, rng.random())
        d = rng.randint(1, 3)
        by_key = {}
        for t in all_structures(g, d, cap=6):
            if not is_neat(g, t):
                continue
            key = structure_order_key(t, d)
            if key in by_key:
                assert by_key[key] == t.forest.key
            else:
                by_key[key] = t.forest.key


def test_minimal_structure_for_fixed_sets_is_maximal_and_neat():
    rng = random.Random(23)
    for _ in range(12):
        n = rng.randint(2, 5)
        g = rand_graph(rng, n, rng.random())
        d = rng.randint(1, 2)
        structures = list(all_structures(g, d, cap=5))
        for _ in range(6):
            sol_mask = rng.getrandbits(n)
            fitting = [t for t in structures
                       if sol_mask & ~t.nodes_mask == 0]
            if not fitting:
                continue
            best = min(fitting, key=lambda t: structure_order_key(t, d))
            assert is_maximal(g, best)
            assert is_neat(g, best)


def test_partial_solution_validation():
    t = tds({0: None, 1: 0}, 2)
    with pytest.raises(ValueError):
        PartialSolution(t, 0b01, 0b00)   # X not inside Sol
    with pytest.raises(ValueError):
        PartialSolution(t, 0b00, 0b100)  # Sol outside nodes
    ps = PartialSolution(t, 0b01, 0b11)
    assert ps.x == frozenset({0}) and ps.sol == frozenset({0, 1})
