"""Chordal completions, clique trees, and potential maximal cliques.

Completions are fill-edge sets over a fixed base graph; minimal ones admit
no single fill-edge removal that keeps the filled graph chordal (which is
equivalent to inclusion-minimality).  Clique trees are maximum-weight
spanning trees of the clique intersection graph; their adhesions are
minimal separators of the base graph whenever the completion is minimal.
"""

from __future__ import annotations

from .graphs import (Graph, InvariantViolationError, as_mask,
                     components_masks, is_mesh_mask, iter_bits, mask_of,
                     set_of)
from .separators import (MIXED, Separator, classify_separator,
                         enumerate_minimal_separators,
                         is_minimal_separator_mask)
from .tdforest import TreedepthStructure

Pair = tuple[int, int]


def _norm_pairs(fill) -> tuple[Pair, ...]:
    out = set()
    for u, v in fill:
        if u == v:
            raise ValueError(f"fill pair ({u},{v}) is a loop")
        out.add((min(u, v), max(u, v)))
    return tuple(sorted(out))


class Completion:
    """A set of fill edges over a base graph."""

    __slots__ = ("fill", "minimal")

    def __init__(self, fill=(), minimal: bool = False):
        self.fill = _norm_pairs(fill)
        self.minimal = minimal

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Completion):
            return self.fill == other.fill
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.fill)

    def __repr__(self) -> str:
        tag = "minimal, " if self.minimal else ""
        return f"Completion({tag}{list(self.fill)})"


def apply_fill(g: Graph, fill) -> Graph:
    edges = g.edges()
    for u, v in fill:
        if g.has_edge(u, v):
            raise ValueError(f"fill pair ({u},{v}) is already an edge")
        edges.append((u, v))
    return Graph(g.n, edges)


def filled_graph(g: Graph, c: "Completion | tuple") -> Graph:
    fill = c.fill if isinstance(c, Completion) else c
    return apply_fill(g, fill)


# === chordality ===

def is_chordal(g: Graph) -> tuple[bool, list[int] | None]:
    """Maximum-cardinality search, then perfect-elimination verification.

    Returns (True, elimination order) or (False, None).
    """
    n = g.n
    visit: list[int] = []
    weight = [0] * n
    remaining = set(range(n))
    while remaining:
        v = min(remaining, key=lambda u: (-weight[u], u))
        remaining.discard(v)
        visit.append(v)
        for u in iter_bits(g.adj[v]):
            if u in remaining:
                weight[u] += 1
    peo = visit[::-1]
    pos = {v: i for i, v in enumerate(peo)}
    for i, v in enumerate(peo):
        later_v = mask_of(u for u in iter_bits(g.adj[v]) if pos[u] > i)
        for u in iter_bits(later_v):
            if later_v & ~(g.adj[u] | 1 << u):
                return False, None
    return True, peo


# === minimal completions ===

def minimalize_completion(g: Graph, fill) -> Completion:
    """Shrink a chordal fill to a minimal one, ascending lexicographic."""
    pairs = list(_norm_pairs(fill))
    if not is_chordal(apply_fill(g, pairs))[0]:
        raise ValueError("starting fill is not a chordal completion")
    while True:
        for e in pairs:
            rest = [p for p in pairs if p != e]
            if is_chordal(apply_fill(g, rest))[0]:
                pairs = rest
                break
        else:
            return Completion(pairs, minimal=True)


def _aligned_start_fill(g: Graph, t: TreedepthStructure) -> list[Pair]:
    f = t.forest
    deep = f.depth_level_mask(t.d)
    nodes = f.nodes_mask
    fill = []
    for u in range(g.n):
        for v in range(u + 1, g.n):
            if g.has_edge(u, v):
                continue
            if (1 << u | 1 << v) & deep:
                continue
            if (nodes >> u & 1 and nodes >> v & 1
                    and not (f.anc_incl[v] >> u & 1 or f.anc_incl[u] >> v & 1)):
                continue
            fill.append((u, v))
    return fill


def aligned_minimal_completion(g: Graph, t: TreedepthStructure) -> Completion:
    """Minimal chordal completion whose fill avoids the structure's
    deepest level and its incomparable pairs."""
    start = _aligned_start_fill(g, t)
    if not is_chordal(apply_fill(g, start))[0]:
        raise InvariantViolationError(
            "the full aligned fill failed to be chordal; the construction "
            "guarantees chordality, so this is an implementation bug")
    return minimalize_completion(g, start)


def is_aligned(t: TreedepthStructure, c: Completion) -> bool:
    f = t.forest
    deep = f.depth_level_mask(t.d)
    nodes = f.nodes_mask
    for u, v in c.fill:
        if (1 << u | 1 << v) & deep:
            return False
        if (nodes >> u & 1 and nodes >> v & 1
                and not (f.anc_incl[v] >> u & 1 or f.anc_incl[u] >> v & 1)):
            return False
    return True


# === maximal cliques and clique trees ===

def maximal_cliques_masks(h: Graph) -> list[int]:
    """Maximal cliques of a chordal graph, canonically ordered."""
    ok, peo = is_chordal(h)
    if not ok:
        raise ValueError("graph is not chordal")
    pos = {v: i for i, v in enumerate(peo)}
    cands = []
    for i, v in enumerate(peo):
        c = 1 << v
        for u in iter_bits(h.adj[v]):
            if pos[u] > i:
                c |= 1 << u
        cands.append(c)
    maximal = []
    for c in cands:
        if not any(c != o and c & ~o == 0 for o in cands):
            if c not in maximal:
                maximal.append(c)
    maximal.sort(key=lambda m: tuple(iter_bits(m)))
    return maximal


def maximal_cliques_chordal(g: Graph, c: Completion) -> list[frozenset[int]]:
    return [set_of(m) for m in maximal_cliques_masks(filled_graph(g, c))]


class CliqueTree:
    """Clique tree of g + completion: bags, tree edges, adhesions."""

    __slots__ = ("g", "completion", "bags", "edges", "nbrs")

    def __init__(self, g: Graph, completion: Completion, bags: list[int],
                 edges: list[Pair]):
        self.g = g
        self.completion = completion
        self.bags = list(bags)
        self.edges = sorted((min(s, t), max(s, t)) for s, t in edges)
        k = len(self.bags)
        nbrs: list[list[int]] = [[] for _ in range(k)]
        for s, t in self.edges:
            nbrs[s].append(t)
            nbrs[t].append(s)
        self.nbrs = nbrs
        if k and len(self.edges) != k - 1:
            raise InvariantViolationError("clique tree edge count is not k-1")
        self._verify_decomposition()

    def adhesion_mask(self, s: int, t: int) -> int:
        return self.bags[s] & self.bags[t]

    def side_nodes(self, s: int, t: int) -> list[int]:
        """Tree nodes on the s side of the tree edge st."""
        seen = {s}
        stack = [s]
        while stack:
            x = stack.pop()
            for y in self.nbrs[x]:
                if y not in seen and not (x == s and y == t):
                    seen.add(y)
                    stack.append(y)
        seen.discard(t)
        return sorted(seen)

    def side_union_mask(self, s: int, t: int) -> int:
        out = 0
        for x in self.side_nodes(s, t):
            out |= self.bags[x]
        return out

    def _verify_decomposition(self) -> None:
        h = filled_graph(self.g, self.completion)
        if self.bags != maximal_cliques_masks(h):
            raise InvariantViolationError("bags are not the maximal cliques")
        # connectivity of the tree and of every vertex's bag set
        if self.bags:
            if len(self.side_nodes(0, -1)) != len(self.bags):
                raise InvariantViolationError("clique tree is not connected")
        for v in range(self.g.n):
            holding = [i for i, b in enumerate(self.bags) if b >> v & 1]
            if not holding:
                raise InvariantViolationError(f"vertex {v} is in no bag")
            seen = {holding[0]}
            stack = [holding[0]]
            while stack:
                x = stack.pop()
                for y in self.nbrs[x]:
                    if y in holding and y not in seen:
                        seen.add(y)
                        stack.append(y)
            if len(seen) != len(holding):
                raise InvariantViolationError(
                    f"bags containing {v} do not form a subtree")

    def __repr__(self) -> str:
        return (f"CliqueTree(bags={[sorted(set_of(b)) for b in self.bags]}, "
                f"edges={self.edges})")


def build_clique_tree(g: Graph, c: Completion) -> CliqueTree:
    """Maximum-weight spanning tree over clique intersections.

    Ties broken by lower clique index pair, so the tree is deterministic.
    For minimal completions every adhesion is verified to be a minimal
    separator of the base graph.
    """
    bags = maximal_cliques_masks(filled_graph(g, c))
    k = len(bags)
    cand = [(-(bags[i] & bags[j]).bit_count(), i, j)
            for i in range(k) for j in range(i + 1, k)]
    cand.sort()
    parent = list(range(k))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = []
    for _, i, j in cand:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            edges.append((i, j))
    ct = CliqueTree(g, c, bags, edges)
    if c.minimal:
        for s, t in ct.edges:
            if not is_minimal_separator_mask(g, ct.adhesion_mask(s, t)):
                raise InvariantViolationError(
                    f"adhesion of tree edge ({s},{t}) is not a minimal "
                    "separator despite a minimal completion")
    return ct


# === property (spade) ===

def _edge_directions(g: Graph, ct: CliqueTree,
                     all_seps: list[Separator]) -> dict[Pair, int | None]:
    """For each tree edge with a mixed adhesion, the endpoint whose side
    holds the non-mesh full component; None for all other edges."""
    out: dict[Pair, int | None] = {}
    for s, t in ct.edges:
        sigma = ct.adhesion_mask(s, t)
        out[(s, t)] = None
        if not is_minimal_separator_mask(g, sigma):
            continue
        sep = classify_separator(g, sigma, all_seps)
        if sep.klass != MIXED:
            continue
        nonmesh = next(d for d in sep.full_masks if not is_mesh_mask(g, d))
        if nonmesh & ~(ct.side_union_mask(s, t) & ~sigma) == 0:
            out[(s, t)] = s
        elif nonmesh & ~(ct.side_union_mask(t, s) & ~sigma) == 0:
            out[(s, t)] = t
        else:
            raise InvariantViolationError(
                "non-mesh side of a mixed adhesion lies on neither side "
                "of its tree edge")
    return out


def _spade_violation(ct: CliqueTree,
                     directions: dict[Pair, int | None]) -> tuple[int, int, int] | None:
    """Lowest (s, t, u) with edges st, tu, direction of tu toward u, and
    adhesion(st) within adhesion(tu)."""
    best = None
    for s, t in ct.edges:
        for a, b in ((s, t), (t, s)):
            sig_ab = ct.adhesion_mask(a, b)
            for u in ct.nbrs[b]:
                if u == a:
                    continue
                key = (min(b, u), max(b, u))
                if directions[key] != u:
                    continue
                if sig_ab & ~ct.adhesion_mask(b, u) == 0:
                    trip = (a, b, u)
                    if best is None or trip < best:
                        best = trip
    return best


def has_spade_property(g: Graph, ct: CliqueTree,
                       all_seps: list[Separator] | None = None) -> bool:
    if all_seps is None:
        all_seps = enumerate_minimal_separators(g)
    return _spade_violation(ct, _edge_directions(g, ct, all_seps)) is None


def enforce_spade(g: Graph, ct: CliqueTree) -> CliqueTree:
    """Reattach tree edges until no adhesion nests into a mixed adhesion
    pointing away from it.

    While edges st, tu exist with adhesion(st) within adhesion(tu) and tu
    directed toward its non-mesh side at u, the edge st is replaced by su.
    The replacement keeps the clique-tree property and the same adhesion
    value, so only attachments move; more than n^2 moves means a bug.
    """
    all_seps = enumerate_minimal_separators(g)
    edges = list(ct.edges)
    moves = 0
    cap = max(g.n * g.n, 1)
    while True:
        cur = CliqueTree(g, ct.completion, ct.bags, edges)
        directions = _edge_directions(g, cur, all_seps)
        viol = _spade_violation(cur, directions)
        if viol is None:
            return cur
        s, t, u = viol
        moves += 1
        if moves > cap:
            raise InvariantViolationError(
                f"spade enforcement exceeded {cap} moves; the move cap "
                "or the move selection is wrong")
        edges.remove((min(s, t), max(s, t)))
        edges.append((min(s, u), max(s, u)))


# === potential maximal cliques ===

def is_pmc(g: Graph, omega) -> bool:
    """Both conditions checked literally: components see proper subsets,
    and every non-adjacent pair inside is covered by some component."""
    o_mask = as_mask(omega)
    if o_mask & ~g.full_mask:
        raise ValueError("candidate set is not within the graph")
    comp_nbhds = [g.nbhd_of_mask(d) for d in components_masks(g, o_mask)]
    for nb in comp_nbhds:
        if nb == o_mask:
            return False
    verts = list(iter_bits(o_mask))
    for i, u in enumerate(verts):
        for v in verts[i + 1:]:
            if g.has_edge(u, v):
                continue
            pair = 1 << u | 1 << v
            if not any(nb & pair == pair for nb in comp_nbhds):
                return False
    return True
