"""Shared constructions for the test suite: named graphs, random graphs,
random treedepth structures, and literal-definition oracles."""

from __future__ import annotations

import random

from p6carve.graphs import (Graph, components_masks, is_connected_mask,
                            is_mesh_mask, iter_bits)
from p6carve.separators import (MESH, MIXED, NONMESH, SUBORDINATE, Separator,
                                carves_away)
from p6carve.tdforest import (RootedForest, TreedepthStructure, _placements)


def path_graph(k: int) -> Graph:
    return Graph(k, [(i, i + 1) for i in range(k - 1)])


def cycle_graph(k: int) -> Graph:
    edges = [(i, i + 1) for i in range(k - 1)]
    if k >= 3:
        edges.append((0, k - 1))
    return Graph(k, edges)


def complete_graph(k: int) -> Graph:
    return Graph(k, [(i, j) for i in range(k) for j in range(i + 1, k)])


def star_graph(k_leaves: int) -> Graph:
    """K_{1,k}: center 0, leaves 1..k."""
    return Graph(k_leaves + 1, [(0, i) for i in range(1, k_leaves + 1)])


def rand_graph(rng: random.Random, n: int, p: float = 0.4) -> Graph:
    edges = [(u, v) for u in range(n) for v in range(u + 1, n)
             if rng.random() < p]
    return Graph(n, edges)


def rand_weights(rng: random.Random, n: int, hi: int = 9) -> list[int]:
    return [rng.randint(1, hi) for _ in range(n)]


def rand_structure(rng: random.Random, g: Graph, d: int,
                   stop_p: float = 0.25) -> TreedepthStructure:
    """Grow a valid treedepth-d structure by random leaf appends."""
    parent: dict[int, int | None] = {}
    while True:
        f = RootedForest(parent)
        if parent and rng.random() < stop_p:
            return TreedepthStructure(f, d)
        options = []
        outside = g.full_mask & ~f.nodes_mask
        for u in iter_bits(outside):
            options.extend((u, pos) for pos in _placements(g, f, d, u))
        if not options:
            return TreedepthStructure(f, d)
        u, pos = rng.choice(options)
        parent[u] = pos


def neat_by_definition(g: Graph, t: TreedepthStructure) -> bool:
    """Literal neatness: every subtree induces a connected subgraph."""
    f = t.forest
    return all(is_connected_mask(g, f.subtree_mask(v)) for v in f.parent)


def mesh_example_graph() -> Graph:
    """A = edge {0,1}, B = edge {4,5}, S = {2,3}, A and B complete to S."""
    edges = [(0, 1), (4, 5)]
    for s in (2, 3):
        for v in (0, 1, 4, 5):
            edges.append(tuple(sorted((s, v))))
    return Graph(6, edges)


def mixed_example_graph() -> Graph:
    """P6-free with S = {8, 9} MIXED: mesh side = edge {0, 1} complete to S,
    non-mesh side = path 2-3-4-5 (8 sees 2,3,4; 9 sees 4,5), plus a stray
    component {6, 7} attached only at 8 (a clarified component)."""
    edges = [(0, 1), (8, 9), (6, 7), (6, 8), (2, 3), (3, 4), (4, 5)]
    edges += [(a, s) for a in (0, 1) for s in (8, 9)]
    edges += [(2, 8), (3, 8), (4, 8), (4, 9), (5, 9)]
    return Graph(10, edges)


def is_t_carver(g: Graph, sep: Separator, st_mask: int, t_mask: int) -> bool:
    """The literal carver-for-a-separator definition: equal structure
    intersection, then per class: equality (subordinate/non-mesh), carving
    away the mesh side (mixed), or carving away every component (mesh)."""
    s = sep.s_mask
    if (st_mask & t_mask) != (s & t_mask):
        return False
    if sep.klass in (SUBORDINATE, NONMESH):
        return st_mask == s
    if sep.klass == MIXED:
        mesh_side = next(d for d in sep.full_masks if is_mesh_mask(g, d))
        return carves_away(g, s, st_mask, mesh_side)
    return all(carves_away(g, s, st_mask, c)
               for c in components_masks(g, s))
