"""Simple-graph representation and connectivity primitives.

Vertices are the integers 0..n-1; the input index order doubles as the
fixed vertex enumeration used by every tie-breaking rule downstream.
Adjacency is stored as one bitmask row per vertex, so vertex sets travel
through the package as plain ints wherever speed matters.  Public helpers
accept and return frozensets; the ``*_mask`` twins work on raw masks.
"""

from __future__ import annotations

from typing import Iterable, Iterator

DEFAULT_VERTEX_CAP = 64


class SizeCapError(ValueError):
    """An input exceeds a configured desk-scale size cap."""


class GraphFormatError(ValueError):
    """A graph, weight, forest, or family file is malformed."""


class InvariantViolationError(RuntimeError):
    """A property the theory guarantees failed to hold at runtime."""


# === bitmask helpers ===

def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def set_of(mask: int) -> frozenset[int]:
    return frozenset(iter_bits(mask))


def lowest_bit(mask: int) -> int:
    """Index of the least set bit; mask must be nonzero."""
    return (mask & -mask).bit_length() - 1


def as_mask(x: "int | Iterable[int]") -> int:
    """Coerce a vertex collection (or an existing mask) to a bitmask."""
    return x if isinstance(x, int) else mask_of(x)


class Graph:
    """Undirected simple graph on vertices 0..n-1.

    ``adj[v]`` is the open neighborhood of v as a bitmask.  Graphs are
    immutable after construction; all algorithms treat them read-only.
    """

    __slots__ = ("n", "adj", "full_mask")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = (),
                 cap: int = DEFAULT_VERTEX_CAP):
        if n < 0:
            raise GraphFormatError(f"vertex count must be nonnegative, got {n}")
        if n > cap:
            raise SizeCapError(f"graph has {n} vertices, cap is {cap}")
        self.n = n
        self.full_mask = (1 << n) - 1
        adj = [0] * n
        for u, v in edges:
            if u == v:
                raise GraphFormatError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphFormatError(f"edge ({u},{v}) out of range for n={n}")
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        self.adj = adj

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for u in range(self.n):
            rest = self.adj[u] >> (u + 1)
            for k in iter_bits(rest):
                out.append((u, u + 1 + k))
        return out

    @property
    def m(self) -> int:
        return sum(self.adj[v].bit_count() for v in range(self.n)) // 2

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Graph):
            return self.n == other.n and self.adj == other.adj
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.n, tuple(self.adj)))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    # mask-level neighborhood primitives

    def nbhd_of_mask(self, mask: int) -> int:
        """Open neighborhood N(S) of the set S given as a mask."""
        out = 0
        rest = mask
        while rest:
            low = rest & -rest
            out |= self.adj[low.bit_length() - 1]
            rest ^= low
        return out & ~mask

    def closed_nbhd_of_mask(self, mask: int) -> int:
        out = mask
        rest = mask
        while rest:
            low = rest & -rest
            out |= self.adj[low.bit_length() - 1]
            rest ^= low
        return out


# === connectivity ===

def components_masks(g: Graph, removed_mask: int = 0) -> list[int]:
    """Connected components of g minus the removed set, as masks.

    Ordered by minimum vertex index so that every downstream enumeration
    that iterates over components is deterministic.
    """
    avail = g.full_mask & ~removed_mask
    out = []
    while avail:
        seed = avail & -avail
        comp = seed
        frontier = seed
        while frontier:
            grow = 0
            rest = frontier
            while rest:
                low = rest & -rest
                grow |= g.adj[low.bit_length() - 1]
                rest ^= low
            grow &= avail & ~comp
            comp |= grow
            frontier = grow
        out.append(comp)
        avail &= ~comp
    return out


def connected_components(g: Graph, removed: Iterable[int] = ()) -> list[frozenset[int]]:
    return [set_of(c) for c in components_masks(g, mask_of(removed))]


def is_connected_mask(g: Graph, mask: int) -> bool:
    """True iff g[mask] is connected (the empty set counts as connected)."""
    if mask == 0:
        return True
    seed = mask & -mask
    comp = seed
    frontier = seed
    while frontier:
        grow = 0
        rest = frontier
        while rest:
            low = rest & -rest
            grow |= g.adj[low.bit_length() - 1]
            rest ^= low
        grow &= mask & ~comp
        comp |= grow
        frontier = grow
    return comp == mask


def closed_neighborhood(g: Graph, s: Iterable[int]) -> frozenset[int]:
    return set_of(g.closed_nbhd_of_mask(mask_of(s)))


def open_neighborhood(g: Graph, s: Iterable[int]) -> frozenset[int]:
    return set_of(g.nbhd_of_mask(mask_of(s)))


# === complement-side primitives ===

def co_components_masks(g: Graph, s_mask: int) -> list[int]:
    """Components of the complement of g[s_mask], as masks, by min vertex."""
    avail = s_mask
    out = []
    while avail:
        seed = avail & -avail
        comp = seed
        frontier = seed
        while frontier:
            grow = 0
            rest = frontier
            while rest:
                low = rest & -rest
                v = low.bit_length() - 1
                grow |= s_mask & ~g.adj[v] & ~(1 << v)
                rest ^= low
            grow &= avail & ~comp
            comp |= grow
            frontier = grow
        out.append(comp)
        avail &= ~comp
    return out


def co_components(g: Graph, s: Iterable[int]) -> list[frozenset[int]]:
    return [set_of(c) for c in co_components_masks(g, mask_of(s))]


def is_mesh_mask(g: Graph, s_mask: int) -> bool:
    """True iff the complement of g[s_mask] is disconnected.

    Singletons and the empty set are not mesh.
    """
    return len(co_components_masks(g, s_mask)) >= 2


# === induced paths ===

def exists_induced_path(g: Graph, t: int) -> bool:
    """True iff g contains an induced path on t vertices."""
    if t < 1:
        raise ValueError("path length must be at least 1")
    if t == 1:
        return g.n >= 1
    if t == 2:
        return g.m >= 1
    adj = g.adj

    def extend(last: int, path_mask: int, blocked: int, todo: int) -> bool:
        # blocked holds the neighborhoods of all path vertices before last
        cand = adj[last] & ~(blocked | path_mask)
        if todo == 1:
            return cand != 0
        nb = blocked | adj[last]
        while cand:
            low = cand & -cand
            u = low.bit_length() - 1
            if extend(u, path_mask | low, nb, todo - 1):
                return True
            cand ^= low
        return False

    for v in range(g.n):
        if extend(v, 1 << v, 0, t - 1):
            return True
    return False


def is_pt_free(g: Graph, t: int) -> bool:
    """True iff g has no induced path on t vertices."""
    return not exists_induced_path(g, t)


def complement_graph(g: Graph) -> Graph:
    h = Graph(g.n, cap=max(g.n, DEFAULT_VERTEX_CAP))
    for v in range(g.n):
        h.adj[v] = g.full_mask & ~g.adj[v] & ~(1 << v)
    return h


def induced_subgraph(g: Graph, keep: Iterable[int]) -> tuple[Graph, list[int]]:
    """Induced subgraph on the kept vertices plus the old-index list.

    Vertex i of the result corresponds to old index ``order[i]`` where
    order is the kept set sorted ascending.
    """
    order = sorted(set(keep))
    pos = {v: i for i, v in enumerate(order)}
    h = Graph(len(order))
    for i, v in enumerate(order):
        row = 0
        for u in iter_bits(g.adj[v]):
            j = pos.get(u)
            if j is not None:
                row |= 1 << j
        h.adj[i] = row
    return h, order
