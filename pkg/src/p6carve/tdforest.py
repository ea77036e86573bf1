"""Treedepth structures, neatness, maximality, and tie-breaking orders.

A treedepth-d structure is a rooted forest of height at most d over a
subset of the vertices that forms an elimination forest of the induced
subgraph: every edge inside the node set joins an ancestor-descendant
pair.  Partial solutions carry such a structure together with the solution
sets X and Sol.  The comparison operators implement the deterministic
tie-breaking chain used by the dynamic program, keyed to the input vertex
order.
"""

from __future__ import annotations

from typing import Iterable, Iterator

from .graphs import Graph, SizeCapError, iter_bits, mask_of, set_of

ParentMap = dict[int, "int | None"]


class RootedForest:
    """Immutable rooted forest over a vertex subset, as a parent map."""

    __slots__ = ("parent", "nodes_mask", "key", "depth", "children",
                 "roots", "height", "anc_incl")

    def __init__(self, parent: ParentMap):
        self.parent = dict(parent)
        self.nodes_mask = mask_of(parent)
        self.key = tuple(sorted((v, -1 if p is None else p)
                                for v, p in parent.items()))
        for v, p in parent.items():
            if p is not None and p not in parent:
                raise ValueError(f"parent {p} of node {v} is not a node")
        children: dict[int, list[int]] = {v: [] for v in parent}
        roots = []
        for v in sorted(parent):
            p = parent[v]
            if p is None:
                roots.append(v)
            else:
                children[p].append(v)
        self.children = children
        self.roots = roots
        # depth and inclusive ancestor masks; also detects parent cycles
        depth: dict[int, int] = {}
        anc: dict[int, int] = {}
        for v in parent:
            if v in depth:
                continue
            chain = []
            u: int | None = v
            while u is not None and u not in depth:
                chain.append(u)
                u = self.parent[u]
                if u in chain:
                    raise ValueError(f"parent cycle through node {u}")
            base_depth = 0 if u is None else depth[u]
            base_anc = 0 if u is None else anc[u]
            for w in reversed(chain):
                base_depth += 1
                base_anc |= 1 << w
                depth[w] = base_depth
                anc[w] = base_anc
        self.depth = depth
        self.anc_incl = anc
        self.height = max(depth.values(), default=0)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, RootedForest):
            return self.key == other.key
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"RootedForest({dict(sorted(self.parent.items()))})"

    def subtree_mask(self, v: int) -> int:
        out = 1 << v
        stack = [v]
        while stack:
            for c in self.children[stack.pop()]:
                out |= 1 << c
                stack.append(c)
        return out

    def nodes_by_depth_desc(self) -> list[int]:
        return sorted(self.parent, key=lambda v: (-self.depth[v], v))

    def depth_level_mask(self, h: int) -> int:
        out = 0
        for v, dep in self.depth.items():
            if dep == h:
                out |= 1 << v
        return out

    def ancestor_at_depth(self, v: int, h: int) -> int | None:
        u: int | None = v
        while u is not None:
            if self.depth[u] == h:
                return u
            u = self.parent[u]
        return None

    def restrict(self, keep_mask: int) -> "RootedForest":
        """Induced subforest on an ancestor-closed node subset."""
        sub: ParentMap = {}
        for v, p in self.parent.items():
            if not keep_mask >> v & 1:
                continue
            if p is not None and not keep_mask >> p & 1:
                raise ValueError(f"restriction set is not ancestor-closed at {v}")
            sub[v] = p
        return RootedForest(sub)


class TreedepthStructure:
    """Rooted forest of height <= d embedded in a graph as above."""

    __slots__ = ("forest", "d")

    def __init__(self, forest: RootedForest, d: int):
        if d < 1:
            raise ValueError("depth bound must be at least 1")
        self.forest = forest
        self.d = d

    @classmethod
    def from_parent(cls, parent: ParentMap, d: int) -> "TreedepthStructure":
        return cls(RootedForest(parent), d)

    @property
    def nodes_mask(self) -> int:
        return self.forest.nodes_mask

    @property
    def key(self) -> tuple:
        return self.forest.key

    def __eq__(self, other: object) -> bool:
        if isinstance(other, TreedepthStructure):
            return self.d == other.d and self.forest.key == other.forest.key
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.d, self.forest.key))

    def __repr__(self) -> str:
        return f"TreedepthStructure(d={self.d}, {self.forest!r})"


class PartialSolution:
    """A structure together with solution sets X subseteq Sol subseteq nodes."""

    __slots__ = ("t", "x_mask", "sol_mask")

    def __init__(self, t: TreedepthStructure, x_mask: int, sol_mask: int):
        if x_mask & ~sol_mask or sol_mask & ~t.nodes_mask:
            raise ValueError("need X within Sol within the structure nodes")
        self.t = t
        self.x_mask = x_mask
        self.sol_mask = sol_mask

    @property
    def key(self) -> tuple:
        return (self.t.forest.key, self.x_mask, self.sol_mask)

    @property
    def x(self) -> frozenset[int]:
        return set_of(self.x_mask)

    @property
    def sol(self) -> frozenset[int]:
        return set_of(self.sol_mask)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, PartialSolution):
            return self.key == other.key and self.t.d == other.t.d
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return (f"PartialSolution(t={self.t.forest.parent}, "
                f"x={sorted(self.x)}, sol={sorted(self.sol)})")


# === validation ===

def validate_structure(g: Graph, t: TreedepthStructure) -> bool:
    f = t.forest
    if f.nodes_mask & ~g.full_mask:
        return False
    if f.height > t.d:
        return False
    for v in f.parent:
        # every neighbor inside the structure must be comparable with v
        inside = g.adj[v] & f.nodes_mask
        for u in iter_bits(inside):
            if not (f.anc_incl[v] >> u & 1 or f.anc_incl[u] >> v & 1):
                return False
    return True


def is_neat(g: Graph, t: TreedepthStructure) -> bool:
    """Every subtree must induce a connected subgraph of g.

    Checked through the equivalent parent-edge form: each non-root node's
    subtree contains a neighbor of the node's parent.
    """
    f = t.forest
    for v, p in f.parent.items():
        if p is None:
            continue
        if not g.adj[p] & f.subtree_mask(v):
            return False
    return True


def neatify(g: Graph, t: TreedepthStructure) -> TreedepthStructure:
    """Reattach subtrees upward until the structure is neat.

    A non-root node v whose subtree avoids the neighborhood of its parent
    is moved below its grandparent (or to the root level).  Each move
    lowers the depth of the whole subtree by one, so the loop stops after
    at most n*d moves.  Deepest violation first, then lowest index.
    """
    parent = dict(t.forest.parent)
    f = t.forest
    while True:
        worst: int | None = None
        worst_rank: tuple[int, int] | None = None
        for v, p in parent.items():
            if p is None:
                continue
            if not g.adj[p] & f.subtree_mask(v):
                rank = (-f.depth[v], v)
                if worst_rank is None or rank < worst_rank:
                    worst, worst_rank = v, rank
        if worst is None:
            return TreedepthStructure(f, t.d)
        parent[worst] = parent[parent[worst]]  # type: ignore[index]
        f = RootedForest(parent)


def appendable_mask(g: Graph, t: TreedepthStructure) -> int:
    """Vertices outside t that can be appended to it as a leaf."""
    f = t.forest
    nodes = f.nodes_mask
    out = 0
    outside = g.full_mask & ~nodes
    for u in iter_bits(outside):
        tn = g.adj[u] & nodes
        if tn == 0:
            out |= 1 << u  # new root, d >= 1 always holds
            continue
        for v in f.parent:
            if f.depth[v] < t.d and tn & ~f.anc_incl[v] == 0:
                out |= 1 << u
                break
    return out


def is_maximal(g: Graph, t: TreedepthStructure) -> bool:
    return appendable_mask(g, t) == 0


# === tie-breaking orders ===

BETTER = "BETTER"
WORSE = "WORSE"
TIE = "TIE"


def set_order_key(mask: int) -> tuple:
    """Sort key realizing the set order: larger first, then lexicographic.

    Two equal-size sets compare by the least index where they differ, the
    set containing it winning; on sorted index tuples this is plain
    lexicographic comparison.
    """
    return (-mask.bit_count(), tuple(iter_bits(mask)))


def structure_order_key(t: TreedepthStructure, d: int | None = None) -> tuple:
    if d is None:
        d = t.d
    f = t.forest
    parts = [set_order_key(f.nodes_mask)]
    for h in range(1, d + 1):
        parts.append(set_order_key(f.depth_level_mask(h)))
    return tuple(parts)


def solution_order_key(ps: PartialSolution, weights: list[int]) -> tuple:
    w = sum(weights[v] for v in iter_bits(ps.x_mask))
    return (-w, set_order_key(ps.x_mask), set_order_key(ps.sol_mask),
            structure_order_key(ps.t))


def compare_solutions(a: PartialSolution, b: PartialSolution,
                      weights: list[int]) -> str:
    ka = solution_order_key(a, weights)
    kb = solution_order_key(b, weights)
    if ka < kb:
        return BETTER
    if ka > kb:
        return WORSE
    return TIE


# === exhaustive enumeration (test oracle) ===

def _placements(g: Graph, f: RootedForest, d: int, u: int) -> Iterator[int | None]:
    """Positions where u can be appended as a leaf: parents or None."""
    tn = g.adj[u] & f.nodes_mask
    if tn == 0:
        yield None
    for v in sorted(f.parent):
        if f.depth[v] < d and tn & ~f.anc_incl[v] == 0:
            yield v


def enumerate_maximal_structures(g: Graph, d: int,
                                 cap: int | None = None) -> Iterator[TreedepthStructure]:
    """Yield every maximal treedepth-d structure of g exactly once.

    Structures are grown by appending leaves in the canonical level order
    (depth, then vertex index), which reaches each parent map through a
    unique append sequence.  Exhaustive, so capped.
    """
    if cap is None:
        cap = 12 if d <= 2 else 9
    if g.n > cap:
        raise SizeCapError(f"maximal-structure enumeration capped at n <= {cap}")

    def walk(parent: ParentMap, last: tuple[int, int]) -> Iterator[TreedepthStructure]:
        f = RootedForest(parent)
        t = TreedepthStructure(f, d)
        if is_maximal(g, t):
            yield t
            return
        outside = g.full_mask & ~f.nodes_mask
        for u in iter_bits(outside):
            for pos in _placements(g, f, d, u):
                dep = 1 if pos is None else f.depth[pos] + 1
                if (dep, u) <= last:
                    continue
                child = dict(parent)
                child[u] = pos
                yield from walk(child, (dep, u))

    yield from walk({}, (0, -1))


def all_structures(g: Graph, d: int, cap: int = 9) -> Iterator[TreedepthStructure]:
    """Yield every treedepth-d structure of g (maximal or not) once."""
    if g.n > cap:
        raise SizeCapError(f"structure enumeration capped at n <= {cap}")

    def walk(parent: ParentMap, last: tuple[int, int]) -> Iterator[TreedepthStructure]:
        f = RootedForest(parent)
        yield TreedepthStructure(f, d)
        outside = g.full_mask & ~f.nodes_mask
        for u in iter_bits(outside):
            for pos in _placements(g, f, d, u):
                dep = 1 if pos is None else f.depth[pos] + 1
                if (dep, u) <= last:
                    continue
                child = dict(parent)
                child[u] = pos
                yield from walk(child, (dep, u))

    yield from walk({}, (0, -1))
