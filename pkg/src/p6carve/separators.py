"""Minimal separators: enumeration, classes, strong modules, footprints.

A minimal separator is a vertex set with at least two full components
(components of its removal seeing the whole set).  Non-subordinate
separators have exactly two full sides, and are classified by how many of
those sides induce a mesh (a graph whose complement is disconnected).
"""

from __future__ import annotations

from .graphs import (Graph, InvariantViolationError, SizeCapError, as_mask,
                     co_components_masks, components_masks, is_mesh_mask,
                     iter_bits, mask_of, set_of)
from .tdforest import TreedepthStructure

SUBORDINATE = "SUBORDINATE"
MESH = "MESH"
MIXED = "MIXED"
NONMESH = "NONMESH"


class Separator:
    """A minimal separator with its full components and (optional) class."""

    __slots__ = ("s_mask", "full_masks", "klass")

    def __init__(self, s_mask: int, full_masks: list[int],
                 klass: str | None = None):
        self.s_mask = s_mask
        self.full_masks = full_masks
        self.klass = klass

    @property
    def s(self) -> frozenset[int]:
        return set_of(self.s_mask)

    @property
    def full_components(self) -> list[frozenset[int]]:
        return [set_of(m) for m in self.full_masks]

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Separator):
            return self.s_mask == other.s_mask
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.s_mask)

    def __repr__(self) -> str:
        return f"Separator({sorted(self.s)}, class={self.klass})"


def full_components_masks(g: Graph, s_mask: int) -> list[int]:
    return [d for d in components_masks(g, s_mask)
            if g.nbhd_of_mask(d) == s_mask]


def full_components(g: Graph, s) -> list[frozenset[int]]:
    return [set_of(d) for d in full_components_masks(g, mask_of(s))]


def is_minimal_separator_mask(g: Graph, s_mask: int) -> bool:
    return len(full_components_masks(g, s_mask)) >= 2


def _separator(g: Graph, s_mask: int) -> Separator:
    return Separator(s_mask, full_components_masks(g, s_mask))


def enumerate_minimal_separators(g: Graph, max_count: int = 100_000
                                 ) -> list[Separator]:
    """All minimal separators, by close-separator seeding + substitution.

    Seeds are the neighborhoods of components of g - N[v]; each confirmed
    separator S is expanded through the neighborhoods of components of
    g - (S u N[x]) for x in S, to a fixpoint.  Every output is verified
    against the two-full-components definition.
    """
    found: set[int] = set()
    queue: list[int] = []

    def offer(cand: int) -> None:
        if cand not in found and is_minimal_separator_mask(g, cand):
            found.add(cand)
            queue.append(cand)
            if len(found) > max_count:
                raise SizeCapError(
                    f"separator enumeration exceeded cap {max_count}")

    for v in range(g.n):
        closed = g.adj[v] | 1 << v
        for d in components_masks(g, closed):
            offer(g.nbhd_of_mask(d))
    while queue:
        s = queue.pop()
        for x in iter_bits(s):
            removed = s | g.adj[x] | 1 << x
            for d in components_masks(g, removed):
                offer(g.nbhd_of_mask(d))
    ordered = sorted(found, key=lambda m: tuple(iter_bits(m)))
    return [_separator(g, m) for m in ordered]


def classify_separator(g: Graph, s, all_seps: list[Separator]) -> Separator:
    """Attach the subordinate/mesh/mixed/non-mesh class to a separator."""
    s_mask = as_mask(s)
    sep = _separator(g, s_mask)
    if len(sep.full_masks) < 2:
        raise ValueError("classify_separator needs a minimal separator")
    for other in all_seps:
        if s_mask & ~other.s_mask:
            continue
        covered_pairs = [
            a | other.s_mask | b
            for i, a in enumerate(other.full_masks)
            for b in other.full_masks[i + 1:]
        ]
        for union in covered_pairs:
            if any(d & union == 0 for d in sep.full_masks):
                sep.klass = SUBORDINATE
                return sep
    if len(sep.full_masks) != 2:
        raise InvariantViolationError(
            f"non-subordinate separator {sorted(sep.s)} has "
            f"{len(sep.full_masks)} full components")
    mesh_sides = sum(1 for d in sep.full_masks if is_mesh_mask(g, d))
    sep.klass = (MESH, MIXED, NONMESH)[2 - mesh_sides]
    return sep


def classify_all(g: Graph, max_count: int = 100_000) -> list[Separator]:
    seps = enumerate_minimal_separators(g, max_count)
    return [classify_separator(g, sep.s_mask, seps) for sep in seps]


# === maximal strong modules ===

def _pair_closure(g: Graph, comp_mask: int, u: int, v: int) -> int:
    """Smallest module of g[comp] containing {u, v}."""
    m = 1 << u | 1 << v
    changed = True
    while changed:
        changed = False
        outside = comp_mask & ~m
        for w in iter_bits(outside):
            inside = g.adj[w] & m
            if inside and inside != m:
                m |= 1 << w
                changed = True
    return m


def maximal_strong_modules_masks(g: Graph, comp_mask: int) -> list[int]:
    if comp_mask == 0:
        return []
    if is_mesh_mask(g, comp_mask):
        return co_components_masks(g, comp_mask)
    # connected, complement connected: the decomposition root is prime, so
    # the block of u is the union of the proper pair-closures through u
    blocks: list[int] = []
    seen = 0
    for u in iter_bits(comp_mask):
        if seen >> u & 1:
            continue
        block = 1 << u
        for v in iter_bits(comp_mask & ~(1 << u)):
            pc = _pair_closure(g, comp_mask, u, v)
            if pc != comp_mask:
                block |= pc
        blocks.append(block)
        seen |= block
    return blocks


def maximal_strong_modules(g: Graph, comp) -> list[frozenset[int]]:
    return [set_of(b) for b in maximal_strong_modules_masks(g, mask_of(comp))]


# === structure-avoiding separators and footprints ===

def is_t_avoiding_mask(t: TreedepthStructure, s_mask: int) -> bool:
    """True iff s meets the structure only inside one vertical path and
    contains none of its depth-d nodes."""
    f = t.forest
    ts = s_mask & f.nodes_mask
    if ts & f.depth_level_mask(t.d):
        return False
    if ts == 0:
        return True
    deepest = max(iter_bits(ts), key=lambda v: (f.depth[v], -v))
    return ts & ~f.anc_incl[deepest] == 0


def footprint(g: Graph, t: TreedepthStructure, a) -> tuple[int, int | None,
                                                            frozenset[int]]:
    """Deepest structure vertex of a full side, with its module witness.

    Returns (p, q, tA): p the deepest vertex of a meeting the structure
    (lowest index on depth ties), tA = N(p) within both a and the
    structure, and q the lowest-index neighbor of p lying in a different
    maximal strong module of g[a] (None when a is a singleton).
    """
    f = t.forest
    a_mask = as_mask(a)
    at = a_mask & f.nodes_mask
    if at == 0:
        raise InvariantViolationError(
            "full side of a structure-avoiding separator misses the structure")
    p = min(iter_bits(at), key=lambda v: (-f.depth[v], v))
    ta_mask = g.adj[p] & at
    if ta_mask.bit_count() > t.d - 1:
        raise InvariantViolationError(
            f"footprint of {p} has {ta_mask.bit_count()} structure neighbors "
            f"inside the side; bound is d-1 = {t.d - 1}")
    q: int | None = None
    if a_mask.bit_count() > 1:
        block_p = 0
        for b in maximal_strong_modules_masks(g, a_mask):
            if b >> p & 1:
                block_p = b
                break
        cand = g.adj[p] & a_mask & ~block_p
        if cand == 0:
            raise InvariantViolationError(
                f"vertex {p} has no neighbor outside its strong module")
        q = next(iter_bits(cand))
    return p, q, set_of(ta_mask)


def carves_away(g: Graph, s, s_tilde, d0) -> bool:
    """True iff no component of g - s_tilde meets both d0 and a different
    component of g - s."""
    s_mask = as_mask(s)
    st_mask = as_mask(s_tilde)
    d0_mask = as_mask(d0)
    others = g.full_mask & ~(s_mask | d0_mask)
    for c in components_masks(g, st_mask):
        if c & d0_mask and c & others:
            return False
    return True


# === desk-scale oracles for the two external subroutines ===

def nonmesh_components_oracle(g: Graph, max_count: int = 100_000
                              ) -> list[frozenset[int]]:
    """Full components of every non-mesh minimal separator."""
    out = []
    for sep in classify_all(g, max_count):
        if sep.klass == NONMESH:
            out.extend(sep.full_components)
    return out


def fuzzy_versions_oracle(g: Graph, max_count: int = 100_000
                          ) -> list[frozenset[int]]:
    """For each mixed separator, a fuzzy version of its mesh side.

    A fuzzy version of A is any A+ with A inside A+ and A+ - A complete
    to A; A itself qualifies, and that is what this oracle returns.
    """
    out = []
    seen = set()
    for sep in classify_all(g, max_count):
        if sep.klass != MIXED:
            continue
        for d in sep.full_masks:
            if is_mesh_mask(g, d) and d not in seen:
                seen.add(d)
                out.append(set_of(d))
    return out
