"""Instance generators: the two named constructions and seeded random
P6-free graphs.

The block construction (`gen_fig1`) joins two rows of blocks A_1..A_n,
B_1..B_n completely across distinct indices (A-A and B-B) and within each
index (A_i-B_i), then attaches one apex vertex per index set of a covering
family, adjacent to the A-blocks it selects.  The hexagon construction
(`gen_gn`) glues n six-cycles to two apexes on alternating parity classes.
"""

from __future__ import annotations

import random

from .graphs import Graph, InvariantViolationError, is_pt_free, iter_bits, mask_of


class GenerationError(RuntimeError):
    """A generator exhausted its retry budget."""


class Fig1Layout:
    """Vertex layout of the block construction, for structural tests."""

    __slots__ = ("n", "fam", "a_blocks", "b_blocks", "vks")

    def __init__(self, n: int, fam, a_blocks, b_blocks, vks):
        self.n = n
        self.fam = [frozenset(k) for k in fam]
        self.a_blocks = a_blocks   # 1-indexed by block: a_blocks[i], i in 1..n
        self.b_blocks = b_blocks
        self.vks = vks             # one apex vertex per family member

    def s_mask(self, j: frozenset[int]) -> int:
        """Separator candidate for an index set J: A-blocks of J plus
        B-blocks of the complement."""
        out = 0
        for i in range(1, self.n + 1):
            out |= self.a_blocks[i] if i in j else self.b_blocks[i]
        return out

    def b_side_mask(self, j: frozenset[int]) -> int:
        out = 0
        for i in j:
            out |= self.b_blocks[i]
        return out

    def a_side_mask(self, j: frozenset[int]) -> int:
        out = 0
        for i in range(1, self.n + 1):
            if i not in j:
                out |= self.a_blocks[i]
        for k, vk in zip(self.fam, self.vks):
            if not k <= j:
                out |= 1 << vk
        return out


def gen_fig1_layout(n: int, i0: int, fam, seed_sizes=None
                    ) -> tuple[Graph, Fig1Layout]:
    fam = [frozenset(k) for k in fam]
    if not 1 <= i0 <= n:
        raise ValueError(f"i0 must lie in 1..{n}")
    covered = set().union(*fam) if fam else set()
    if covered != set(range(1, n + 1)):
        raise ValueError("family must cover exactly the indices 1..n")
    if seed_sizes is None:
        a_sizes = b_sizes = [1] * n
    else:
        a_sizes, b_sizes = seed_sizes
    if len(a_sizes) != n or len(b_sizes) != n:
        raise ValueError("need one size per block")
    a_blocks = {}
    b_blocks = {}
    nxt = 0
    for i in range(1, n + 1):
        a_blocks[i] = mask_of(range(nxt, nxt + a_sizes[i - 1]))
        nxt += a_sizes[i - 1]
    for i in range(1, n + 1):
        b_blocks[i] = mask_of(range(nxt, nxt + b_sizes[i - 1]))
        nxt += b_sizes[i - 1]
    vks = list(range(nxt, nxt + len(fam)))
    nxt += len(fam)

    edges = []

    def join(mask1: int, mask2: int) -> None:
        for u in iter_bits(mask1):
            for v in iter_bits(mask2):
                edges.append((min(u, v), max(u, v)))

    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            join(a_blocks[i], a_blocks[j])
            join(b_blocks[i], b_blocks[j])
        join(a_blocks[i], b_blocks[i])
    for k, vk in zip(fam, vks):
        for i in k:
            join(a_blocks[i], 1 << vk)
    g = Graph(nxt, edges)
    if not is_pt_free(g, 6):
        raise InvariantViolationError(
            "block construction emitted a graph with an induced P6; "
            "the construction guarantees P6-freeness, so this is a bug")
    return g, Fig1Layout(n, fam, a_blocks, b_blocks, vks)


def gen_fig1(n: int, i0: int, fam, seed_sizes=None) -> Graph:
    return gen_fig1_layout(n, i0, fam, seed_sizes)[0]


def gen_gn(n: int) -> Graph:
    """n hexagons plus two apexes on the even/odd parity classes."""
    if n < 1:
        raise ValueError("need at least one hexagon")
    a = 6 * n
    b = 6 * n + 1
    edges = []
    for i in range(n):
        base = 6 * i
        for j in range(6):
            edges.append(tuple(sorted((base + j, base + (j + 1) % 6))))
        for j in (0, 2, 4):
            edges.append((base + j, a))
        for j in (1, 3, 5):
            edges.append((base + j, b))
    g = Graph(6 * n + 2, edges)
    if not is_pt_free(g, 7):
        raise InvariantViolationError(
            "hexagon construction emitted a graph with an induced P7")
    return g


def gn_vertex(i: int, j: int, n: int) -> int:
    """Index of cycle vertex j of hexagon i (1-based i, j modulo 6)."""
    if not 1 <= i <= n:
        raise ValueError("hexagon index out of range")
    return 6 * (i - 1) + j % 6


def _random_split_graph(rng: random.Random, n: int) -> Graph:
    k = rng.randint(0, n)
    clique = list(range(k))
    edges = [(u, v) for u in clique for v in clique if u < v]
    for v in range(k, n):
        for u in clique:
            if rng.random() < 0.5:
                edges.append((u, v))
    return Graph(n, edges)


def _random_cograph(rng: random.Random, n: int) -> Graph:
    if n == 1:
        return Graph(1)
    left = rng.randint(1, n - 1)
    g1 = _random_cograph(rng, left)
    g2 = _random_cograph(rng, n - left)
    edges = list(g1.edges())
    for u, v in g2.edges():
        edges.append((u + left, v + left))
    if rng.random() < 0.5:  # join instead of disjoint union
        for u in range(left):
            for v in range(left, n):
                edges.append((u, v))
    return Graph(n, edges)


def gen_random_p6free(n: int, p: float, seed: int, retries: int = 200) -> Graph:
    """Rejection-sample an Erdos-Renyi graph until it is P6-free; fall
    back to planted P6-free families when the budget runs out."""
    rng = random.Random(seed)
    for _ in range(retries):
        edges = [(u, v) for u in range(n) for v in range(u + 1, n)
                 if rng.random() < p]
        g = Graph(n, edges)
        if is_pt_free(g, 6):
            return g
    for make in (_random_split_graph, _random_cograph):
        for _ in range(20):
            g = make(rng, n)
            if is_pt_free(g, 6):
                return g
    raise GenerationError(
        f"could not generate a P6-free graph on {n} vertices")
