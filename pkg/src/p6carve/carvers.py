"""Carver-family constructions and the family validity checker.

The dynamic program needs, for every treedepth-d structure, one minimal
completion and clique tree in which every bag owns a family member C that
(i) covers the bag's structure vertices while holding at most k structure
vertices itself, and (ii) leaves every component of the graph minus C inside
the bag plus a single neighboring subtree.  On P6-free graphs such families
exist with polynomially many members, assembled from three per-bag sources:

* bags holding a maximum-depth structure vertex v: the closed neighborhood
  of v minus a guessed small set of v's neighbors ("leafy" members);
* bags whose removal leaves no two components dominating all component
  neighborhoods: the bag itself (a potential maximal clique);
* the remaining "two-sided" bags: unions of carvers for the two witness
  separators, patched with case-specific neighborhoods and post-processed
  by the mixed-separator improver.

Guesses are realized over computed collections (enumerated minimal
separators, their full components, maximal strong modules, co-components),
never over raw vertex tuples, which keeps the families desk-scale.  Members
that do not correspond to a correct guess are harmless: validity only needs
the family to contain enough good members, and `validate_family` checks
exactly that bag by bag.
"""

from __future__ import annotations

from itertools import combinations
from typing import Callable, Iterable

from .chordal import (aligned_minimal_completion, build_clique_tree,
                      enforce_spade, is_pmc)
from .graphs import (Graph, SizeCapError, as_mask, co_components_masks,
                     components_masks, is_mesh_mask, is_pt_free, iter_bits,
                     lowest_bit, mask_of, set_of)
from .separators import (MESH, MIXED, NONMESH, Separator, classify_all,
                         maximal_strong_modules_masks)
from .tdforest import TreedepthStructure, validate_structure


def _ordered(masks: Iterable[int]) -> list[int]:
    return sorted(set(masks), key=lambda m: tuple(iter_bits(m)))


def _as_sets(masks: Iterable[int]) -> list[frozenset[int]]:
    return [set_of(m) for m in _ordered(masks)]


def _subsets_upto(mask: int, k: int) -> list[int]:
    """All submasks of `mask` with at most k bits, the empty mask included."""
    bits = list(iter_bits(mask))
    out = [0]
    for r in range(1, min(k, len(bits)) + 1):
        out.extend(mask_of(c) for c in combinations(bits, r))
    return out


def _union_choices(parts: list[int], cap: int) -> list[int]:
    """Unions of between one and `cap` of the given disjoint parts."""
    out: list[int] = []
    for r in range(1, min(cap, len(parts)) + 1):
        for combo in combinations(parts, r):
            u = 0
            for p in combo:
                u |= p
            out.append(u)
    return out


def _pinned_union(parts: list[int], t_pin: int, cap: int) -> list[int]:
    """The union of the parts meeting t_pin, when between one and cap do."""
    hit = [c for c in parts if c & t_pin]
    if not hit or len(hit) > cap:
        return []
    u = 0
    for c in hit:
        u |= c
    return [u]


class CarverFamily:
    """Deduplicated candidate carvers plus the (depth, defect) parameters.

    `masks` is the canonical sorted list of members as bitmasks; `sets`
    exposes them as frozensets.  `d` is the treedepth bound the family was
    built for and `k` the defect bound used by `validate_family` (how many
    structure vertices a member may hold)."""

    __slots__ = ("masks", "d", "k")

    def __init__(self, sets: Iterable[int | frozenset[int] | set[int]],
                 d: int, k: int):
        if d < 1:
            raise ValueError("depth bound must be at least 1")
        if k < 1:
            raise ValueError("defect bound must be at least 1")
        self.masks = _ordered(as_mask(s) for s in sets)
        self.d = d
        self.k = k

    @property
    def sets(self) -> list[frozenset[int]]:
        return [set_of(m) for m in self.masks]

    def __len__(self) -> int:
        return len(self.masks)

    def __iter__(self):
        return iter(self.sets)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"CarverFamily(size={len(self.masks)}, d={self.d}, k={self.k})"


# === per-separator constructions ===

def _subordinate_masks(g: Graph) -> set[int]:
    """Neighborhoods of components left by removing N(W) for every vertex
    set W of size at most six.

    A subordinate separator S has a witness superset separator plus a far
    full component D with N(D) = S; both sides of the witness are dominated
    by at most three vertices each, so S = N(D) for some component D of
    g - N(W) with |W| <= 6.  Enumerating all such W captures every
    subordinate minimal separator (plus harmless extras)."""
    out: set[int] = set()
    verts = range(g.n)
    for r in range(0, min(6, g.n) + 1):
        for combo in combinations(verts, r):
            nw = g.nbhd_of_mask(mask_of(combo))
            for comp in components_masks(g, nw):
                out.add(g.nbhd_of_mask(comp))
    return out


def subordinate_family(g: Graph) -> list[frozenset[int]]:
    """Candidate carvers covering every subordinate minimal separator."""
    return _as_sets(_subordinate_masks(g))


def _cross_module_mate(g: Graph, comp_mask: int, p: int) -> int | None:
    """Lowest neighbor of p inside the component that lies in a different
    maximal strong module; None when the component is a singleton."""
    if comp_mask & (comp_mask - 1) == 0:
        return None
    block = 0
    for b in maximal_strong_modules_masks(g, comp_mask):
        if b >> p & 1:
            block = b
            break
    cand = g.adj[p] & comp_mask & ~block
    if cand == 0:
        return None
    return lowest_bit(cand)


def _side_guesses(g: Graph, comp_mask: int, d: int,
                  t_pin: int | None = None) -> list[tuple[int, int, int, int | None]]:
    """Guess tuples (added, core_nbhd, p, q) for one full side.

    p ranges over the side; T ranges over subsets of p's neighbors inside
    the side of size at most d-1 (pinned to the structure vertices when
    t_pin is given); added = N(p) minus T; core_nbhd = the open neighborhood
    of {p, q} plus T, where q is p's cross-module mate."""
    out: list[tuple[int, int, int, int | None]] = []
    seen: set[tuple[int, int, bool]] = set()
    for p in iter_bits(comp_mask):
        q = _cross_module_mate(g, comp_mask, p)
        pool = g.adj[p] & comp_mask
        if t_pin is not None:
            t_opts = [pool & t_pin]
        else:
            t_opts = _subsets_upto(pool, d - 1)
        core_base = (1 << p) | (0 if q is None else 1 << q)
        for t_mask in t_opts:
            if t_mask.bit_count() > d - 1:
                continue
            add = g.adj[p] & ~t_mask
            core_nb = g.nbhd_of_mask(core_base | t_mask)
            key = (add, core_nb, q is None)
            if key not in seen:
                seen.add(key)
                out.append((add, core_nb, p, q))
    return out


def _mesh_patch(g: Graph, s_mask: int, a_mask: int, b_mask: int,
                pa: int, qa: int, pb: int, qb: int) -> int | None:
    """Extra carver vertices for a separator with two mesh full sides.

    Scans for the first pair (ra, rb) whose six-vertex set dominates the
    separator; the patch is the union of the neighborhoods of all components
    outside the closed neighborhood of the six, plus the intersection of the
    closed neighborhoods of {qa, ra} and {qb, rb}."""
    base = g.adj[pa] | g.adj[qa] | g.adj[pb] | g.adj[qb]
    hit: tuple[int, int] | None = None
    for ra in iter_bits(a_mask):
        part = base | g.adj[ra]
        for rb in iter_bits(b_mask):
            if s_mask & ~(part | g.adj[rb]) == 0:
                hit = (ra, rb)
                break
        if hit is not None:
            break
    if hit is None:
        return None
    ra, rb = hit
    six = mask_of([pa, qa, ra, pb, qb, rb])
    closed = six | g.nbhd_of_mask(six)
    extra = 0
    for comp in components_masks(g, closed):
        extra |= g.nbhd_of_mask(comp)
    extra |= (g.closed_nbhd_of_mask(1 << qa | 1 << ra)
              & g.closed_nbhd_of_mask(1 << qb | 1 << rb))
    return extra


def _separator_emissions(g: Graph, d: int, seps: list[Separator],
                         t_pin: int | None = None) -> dict[int, set[int]]:
    """Staged candidate carvers for each separator with a mesh full side.

    Stage one covers singleton sides: the guessed structure part of S plus
    N(p) minus the guessed structure neighbors, from both sides.  Stage two
    adds the intersection of the two core neighborhoods (a subset of S).
    Stage three, for two mesh sides, adds the residual-component patch."""
    out: dict[int, set[int]] = {}
    for sep in seps:
        if sep.klass not in (MIXED, MESH):
            continue
        s = sep.s_mask
        found: set[int] = set()
        a_mask, b_mask = sep.full_masks
        if t_pin is not None:
            ts_opts = [s & t_pin]
        else:
            ts_opts = _subsets_upto(s, d - 1)
        ts_opts = [t for t in ts_opts if t.bit_count() <= d - 1]
        ga = _side_guesses(g, a_mask, d, t_pin)
        gb = _side_guesses(g, b_mask, d, t_pin)
        patch_memo: dict[tuple[int, int, int, int], int | None] = {}
        for add_a, core_a, pa, qa in ga:
            for add_b, core_b, pb, qb in gb:
                base = add_a | add_b
                stage2 = None
                patch = None
                if qa is not None and qb is not None:
                    stage2 = base | (core_a & core_b)
                    if sep.klass == MESH:
                        key = (pa, qa, pb, qb)
                        if key not in patch_memo:
                            patch_memo[key] = _mesh_patch(
                                g, s, a_mask, b_mask, pa, qa, pb, qb)
                        patch = patch_memo[key]
                for ts in ts_opts:
                    found.add(ts | base)
                    if stage2 is not None:
                        found.add(ts | stage2)
                        if patch is not None:
                            found.add(ts | stage2 | patch)
        out[s] = found
    return out


def separator_carver_family(g: Graph, d: int) -> list[frozenset[int]]:
    """Candidate carvers covering every structure-avoiding minimal separator.

    Union of: the subordinate construction, the neighborhoods N(D) of full
    components of separators whose full sides are all non-mesh (those
    neighborhoods equal the separator itself), and the staged guess
    enumerations for separators with at least one mesh full side."""
    if d < 1:
        raise ValueError("depth bound must be at least 1")
    seps = classify_all(g)
    masks = _subordinate_masks(g)
    for sep in seps:
        if sep.klass == NONMESH:
            for dmask in sep.full_masks:
                masks.add(g.nbhd_of_mask(dmask))
    for found in _separator_emissions(g, d, seps).values():
        masks |= found
    return _as_sets(masks)


# === the mixed-separator improver ===

def _improve_for(g: Graph, st: int, d: int, sep: Separator,
                 t_pin: int | None = None) -> set[int]:
    """Refinements of the candidate `st` against one mixed separator.

    With A the mesh full side and B the other full side: X adds to st the
    neighborhood of a guessed union of at most d co-components of A plus
    N(p_B) minus guessed structure neighbors; X is emitted, then refined by
    adding N(M_I) inside N(q_B) plus the components of N(q_B) - X that touch
    a component of g - X - N(q_B) adjacent to a guessed vertex x of S - X."""
    a_mask, b_mask = sep.full_masks
    if is_mesh_mask(g, b_mask) and not is_mesh_mask(g, a_mask):
        a_mask, b_mask = b_mask, a_mask
    s = sep.s_mask
    cocomps = co_components_masks(g, a_mask)
    if t_pin is not None:
        m_opts = _pinned_union(cocomps, t_pin, d)
    else:
        m_opts = _union_choices(cocomps, d)
    out: set[int] = set()
    for m_union in m_opts:
        nm = g.nbhd_of_mask(m_union)
        for pb in iter_bits(b_mask):
            pool = g.adj[pb] & b_mask
            if t_pin is not None:
                tb_opts = [pool & t_pin]
            else:
                tb_opts = _subsets_upto(pool, d - 1)
            qb = _cross_module_mate(g, b_mask, pb)
            for tb in tb_opts:
                if tb.bit_count() > d - 1:
                    continue
                x = st | nm | (g.adj[pb] & ~tb)
                out.add(x)
                if qb is None:
                    continue
                rem = s & ~x
                if rem == 0:
                    continue
                nqb = g.adj[qb]
                keep_h = nqb & ~x
                hcomps = (components_masks(g, g.full_mask & ~keep_h)
                          if keep_h else [])
                dparts: list[tuple[int, int]] = []
                for c in components_masks(g, x | nqb):
                    ndc = g.nbhd_of_mask(c)
                    hmask = 0
                    for h in hcomps:
                        if h & ndc:
                            hmask |= h
                    dparts.append((c, hmask))
                for mi in cocomps:
                    add_mi = g.nbhd_of_mask(mi) & nqb
                    for xv in iter_bits(rem):
                        hx = 0
                        axv = g.adj[xv]
                        for c, hmask in dparts:
                            if axv & c:
                                hx |= hmask
                        out.add(x | add_mi | hx)
    return out


def improve_mixed_carver(g: Graph, s_tilde, d: int,
                         seps: list[Separator] | None = None
                         ) -> list[frozenset[int]]:
    """All improver outputs for a candidate, over the mixed separators.

    Every output contains `s_tilde`; the input itself is always included.
    When `seps` is given only those separators are used (each must be
    classified); otherwise all mixed minimal separators of g are."""
    if d < 1:
        raise ValueError("depth bound must be at least 1")
    st = as_mask(s_tilde)
    if seps is None:
        seps = [sep for sep in classify_all(g) if sep.klass == MIXED]
    masks: set[int] = {st}
    for sep in seps:
        if sep.klass != MIXED:
            continue
        masks |= _improve_for(g, st, d, sep)
    return _as_sets(masks)


# === leafy and not-two-sided members ===

def _leafy_masks(g: Graph, d: int) -> set[int]:
    out: set[int] = set()
    for v in range(g.n):
        closed = g.adj[v] | 1 << v
        for x in _subsets_upto(g.adj[v], d - 1):
            out.add(closed & ~x)
    return out


def leafy_containers(g: Graph, d: int) -> list[frozenset[int]]:
    """Closed neighborhoods minus at most d-1 guessed neighbors.

    Covers every bag holding a structure vertex v of maximum depth: such a
    bag lies inside N[v], and the member N[v] minus (N(v) minus the bag's
    structure vertices) both contains the bag's structure part and meets the
    structure in at most d vertices."""
    if d < 1:
        raise ValueError("depth bound must be at least 1")
    return _as_sets(_leafy_masks(g, d))


_PMC_FILTER_CAP = 12


def _pmc_masks(g: Graph) -> list[int]:
    if g.n > _PMC_FILTER_CAP:
        raise SizeCapError(
            f"potential-maximal-clique enumeration by subset filtering "
            f"supports at most {_PMC_FILTER_CAP} vertices, got {g.n}")
    return [m for m in range(1, 1 << g.n) if is_pmc(g, m)]


def _is_two_sided(g: Graph, omega: int) -> bool:
    """True when two distinct components of g - omega dominate all component
    neighborhoods (every N(D) within N(D0) or within N(D1))."""
    comps = components_masks(g, omega)
    if len(comps) < 2:
        return False
    nbs = [g.nbhd_of_mask(c) for c in comps]
    for i in range(len(nbs)):
        for j in range(i + 1, len(nbs)):
            if all(nb & ~nbs[i] == 0 or nb & ~nbs[j] == 0 for nb in nbs):
                return True
    return False


def _nts_masks(g: Graph) -> set[int]:
    return {m for m in _pmc_masks(g) if not _is_two_sided(g, m)}


def not_two_sided_containers(g: Graph, d: int) -> list[frozenset[int]]:
    """Every potential maximal clique that is not two-sided, as its own
    container: such a bag is itself a valid member for the bags it equals.
    Potential maximal cliques with zero or one component are included."""
    if d < 1:
        raise ValueError("depth bound must be at least 1")
    return _as_sets(_nts_masks(g))


# === two-sided members ===

def _witness_pairs(g: Graph, seps: list[Separator]
                   ) -> list[tuple[int, int, int, int, int, list[int]]]:
    """Candidate witness pairs (D0, N(D0), D1, N(D1), omega, components).

    D0, D1 range over full components of enumerated minimal separators;
    pairs must be disjoint and non-adjacent, their neighborhood union must
    be a potential maximal clique, and every component neighborhood of the
    union must lie inside N(D0) or N(D1).  Every true witness pair of a
    two-sided bag passes all four filters."""
    sides: dict[int, int] = {}
    for sep in seps:
        for c in sep.full_masks:
            sides[c] = g.nbhd_of_mask(c)
    items = _ordered(sides)
    pairs: list[tuple[int, int, int, int, int, list[int]]] = []
    for i, da in enumerate(items):
        na = sides[da]
        for db in items[i + 1:]:
            if da & db:
                continue
            nb = sides[db]
            if na & db or nb & da:
                continue
            omega = na | nb
            if omega == 0:
                continue
            comps = components_masks(g, omega)
            nbs = [g.nbhd_of_mask(c) for c in comps]
            if not all(x & ~na == 0 or x & ~nb == 0 for x in nbs):
                continue
            if not is_pmc(g, omega):
                continue
            pairs.append((da, na, db, nb, omega, comps))
    return pairs


def _two_mesh_extras(g: Graph, d: int, da: int, db: int, na: int, nb: int,
                     t_pin: int | None = None) -> list[int]:
    """Patches for a witness pair whose components are both mesh.

    Finds dominating triples {p, q, r} on each side (p lowest, q its
    cross-module mate, first (r0, r1) whose six-set dominates the common
    neighborhood), then removes guessed co-component unions from the closed
    neighborhood of the six."""
    target = na & nb
    p0 = lowest_bit(da)
    q0 = _cross_module_mate(g, da, p0)
    p1 = lowest_bit(db)
    q1 = _cross_module_mate(g, db, p1)
    if q0 is None or q1 is None:
        return []
    base = g.adj[p0] | g.adj[q0] | g.adj[p1] | g.adj[q1]
    hit: tuple[int, int] | None = None
    for r0 in iter_bits(da):
        part = base | g.adj[r0]
        for r1 in iter_bits(db):
            if target & ~(part | g.adj[r1]) == 0:
                hit = (r0, r1)
                break
        if hit is not None:
            break
    if hit is None:
        return []
    six = mask_of([p0, q0, hit[0], p1, q1, hit[1]])
    closed = six | g.nbhd_of_mask(six)
    cc0 = co_components_masks(g, da)
    cc1 = co_components_masks(g, db)
    if t_pin is not None:
        m0_opts = _pinned_union(cc0, t_pin, d)
        m1_opts = _pinned_union(cc1, t_pin, d)
    else:
        m0_opts = _union_choices(cc0, d)
        m1_opts = _union_choices(cc1, d)
    extras: set[int] = set()
    for m0 in m0_opts:
        for m1 in m1_opts:
            extras.add(closed & ~(m0 | m1))
    return _ordered(extras)


def _mixed_pair_patches(g: Graph, d: int, d0: int, n0: int, d1: int, n1: int,
                        omega: int, comps: list[int],
                        t_pin: int | None = None) -> list[int]:
    """Patches for a witness pair with a third component attached to the
    private part of N(D1).

    For each component D (other than D0, D1) with a neighbor v inside
    N(D1) - N(D0): add N(p_k) minus guessed structure neighbors for both
    sides, the intersection N(q0) with N({v, q1}), and N(D)."""
    diff1 = n1 & ~n0
    if diff1 == 0:
        return []
    g0 = _side_guesses(g, d0, d, t_pin)
    g1 = _side_guesses(g, d1, d, t_pin)
    patches: set[int] = set()
    for comp in comps:
        if comp == d0 or comp == d1:
            continue
        ndc = g.nbhd_of_mask(comp)
        vs = ndc & diff1
        if vs == 0:
            continue
        for v in iter_bits(vs):
            v_bit = 1 << v
            for add0, _c0, p0, q0 in g0:
                qa = p0 if q0 is None else q0
                base0 = add0 | ndc
                for add1, _c1, p1, q1 in g1:
                    qb = p1 if q1 is None else q1
                    cross = g.adj[qa] & ((g.adj[v] | g.adj[qb])
                                         & ~(v_bit | 1 << qb))
                    patches.add(base0 | add1 | cross)
    return _ordered(patches)


def _two_sided_masks(g: Graph, d: int,
                     cand_for: Callable[[int], list[int]],
                     improver_results: Callable[[int, Separator], Iterable[int]],
                     by_mask: dict[int, Separator],
                     seps: list[Separator],
                     prior_extra: set[int],
                     t_pin: int | None = None) -> set[int]:
    """Assemble the two-sided members: closed neighborhoods, witness-pair
    union candidates with their patches, improver refinements, and the
    final splice pass over previously built members."""
    out: set[int] = set()
    for v in range(g.n):
        out.add(g.adj[v] | 1 << v)
    pairs = _witness_pairs(g, seps)
    pair_usets: list[list[int]] = []
    for da, na, db, nb, omega, comps in pairs:
        u_set: set[int] = set()
        for s0 in cand_for(na):
            for s1 in cand_for(nb):
                u_set.add(s0 | s1)
        u_list = _ordered(u_set)
        pair_usets.append(u_list)
        emitted: set[int] = set(u_list)
        if is_mesh_mask(g, da) and is_mesh_mask(g, db):
            for e in _two_mesh_extras(g, d, da, db, na, nb, t_pin):
                for u in u_list:
                    emitted.add(u | e)
        for xa, sa, xb, sb in ((da, na, db, nb), (db, nb, da, na)):
            for e in _mixed_pair_patches(g, d, xa, sa, xb, sb, omega,
                                         comps, t_pin):
                for u in u_list:
                    emitted.add(u | e)
        improved: set[int] = set()
        for smask in (na, nb):
            sep = by_mask.get(smask)
            if sep is None or sep.klass != MIXED:
                continue
            for st_mask in emitted:
                improved.update(improver_results(st_mask, sep))
        out |= emitted | improved
    # Splice pass: a carver for the nearest bag on the far side of D1 can
    # stand in after removing at most d of its vertices inside D1.
    prior = _ordered(out | prior_extra)
    for (da, na, db, nb, omega, comps), u_list in zip(pairs, pair_usets):
        for side in (da, db):
            spliced: set[int] = set()
            for u in u_list:
                for c1 in prior:
                    spliced.add(u | c1)
            for w in spliced:
                pool = w & side
                if t_pin is not None:
                    pool &= t_pin
                for a1 in _subsets_upto(pool, d):
                    out.add(w & ~a1)
    return out


def two_sided_carver_family(g: Graph, d: int,
                            sep_family: Iterable[frozenset[int] | int] | None = None,
                            improver: Callable[..., Iterable] | None = None
                            ) -> list[frozenset[int]]:
    """Candidate members for structure-avoiding two-sided bags.

    When `sep_family` is None the per-separator constructions are computed
    internally and candidates for each witness separator come from its own
    staged emissions (plus the separator itself); a caller-provided flat
    family is used unfiltered for every separator instead.  `improver`
    defaults to `improve_mixed_carver` and is applied, for each witness pair,
    to every emitted candidate against each witness separator that is mixed;
    raw candidates are kept alongside the refinements."""
    if d < 1:
        raise ValueError("depth bound must be at least 1")
    seps = classify_all(g)
    by_mask = {sep.s_mask: sep for sep in seps}
    if sep_family is None:
        ems = _separator_emissions(g, d, seps)

        def cand_for(smask: int) -> list[int]:
            return _ordered(ems.get(smask, set()) | {smask})
    else:
        flat = _ordered(as_mask(s) for s in sep_family)

        def cand_for(smask: int) -> list[int]:
            return flat

    memo: dict[tuple[int, int], list[int]] = {}

    def improver_results(st_mask: int, sep: Separator) -> list[int]:
        key = (st_mask, sep.s_mask)
        if key not in memo:
            if improver is None:
                memo[key] = _ordered(_improve_for(g, st_mask, d, sep))
            else:
                try:
                    res = improver(g, set_of(st_mask), d, seps=[sep])
                except TypeError:
                    res = improver(g, set_of(st_mask), d)
                memo[key] = _ordered(as_mask(s) for s in res)
        return memo[key]

    prior_extra = _leafy_masks(g, d) | _nts_masks(g)
    masks = _two_sided_masks(g, d, cand_for, improver_results, by_mask,
                             seps, prior_extra)
    masks.discard(0)
    return _as_sets(masks)


# === assembly and validation ===

def build_family(g: Graph, d: int, k: int | None = None) -> CarverFamily:
    """The full candidate family: leafy members, not-two-sided potential
    maximal cliques, and two-sided members.  The defect bound defaults to d,
    which the three sources respect for their correct members.  Rejects
    graphs with an induced six-vertex path."""
    if d < 1:
        raise ValueError("depth bound must be at least 1")
    if not is_pt_free(g, 6):
        raise ValueError("carver families require a P6-free input graph")
    kk = d if k is None else k
    masks = _leafy_masks(g, d) | _nts_masks(g)
    masks |= {as_mask(s) for s in two_sided_carver_family(g, d)}
    masks.discard(0)
    return CarverFamily(masks, d, kk)


def certificate_family(g: Graph, d: int, t: TreedepthStructure,
                       k: int | None = None) -> CarverFamily:
    """A smaller family with every guess pinned to the given structure.

    Follows the same constructions as `build_family` but collapses each
    guess over structure subsets to the actual structure values; used to
    debug `validate_family` failures on specific structures."""
    if not is_pt_free(g, 6):
        raise ValueError("carver families require a P6-free input graph")
    if not validate_structure(g, t):
        raise ValueError("certificate mode needs a valid treedepth structure")
    t_pin = t.forest.nodes_mask
    kk = d if k is None else k
    seps = classify_all(g)
    by_mask = {sep.s_mask: sep for sep in seps}
    ems = _separator_emissions(g, d, seps, t_pin)

    def cand_for(smask: int) -> list[int]:
        return _ordered(ems.get(smask, set()) | {smask})

    memo: dict[tuple[int, int], list[int]] = {}

    def improver_results(st_mask: int, sep: Separator) -> list[int]:
        key = (st_mask, sep.s_mask)
        if key not in memo:
            memo[key] = _ordered(_improve_for(g, st_mask, d, sep, t_pin))
        return memo[key]

    masks = _leafy_masks(g, d) | _nts_masks(g)
    masks |= _two_sided_masks(g, d, cand_for, improver_results, by_mask,
                              seps, set(masks), t_pin)
    masks.discard(0)
    return CarverFamily(masks, d, kk)


def validate_family(g: Graph, fam: CarverFamily, t: TreedepthStructure,
                    stats: dict | None = None) -> bool:
    """Check the family against one structure: build the structure-aligned
    minimal completion and its reattachment-normalized clique tree, then
    verify every bag has a member C with (i) C's structure part containing
    the bag's and at most k vertices, and (ii) every component of g - C
    inside the bag plus a single neighboring subtree.

    When a dict is passed as `stats`, 'max_defect_used' is raised to the
    largest |C meet structure| over the chosen witnesses (reporting aid)."""
    if not validate_structure(g, t):
        raise ValueError("validate_family needs a valid treedepth structure")
    completion = aligned_minimal_completion(g, t)
    ct = enforce_spade(g, build_clique_tree(g, completion))
    tmask = t.forest.nodes_mask
    comp_cache: dict[int, list[int]] = {}
    for i in range(len(ct.bags)):
        bag = ct.bags[i]
        bag_t = bag & tmask
        alloweds = [bag]
        for j in ct.nbrs[i]:
            alloweds.append(bag | ct.side_union_mask(j, i))
        found = False
        for cm in fam.masks:
            ct_t = cm & tmask
            if bag_t & ~ct_t:
                continue
            if ct_t.bit_count() > fam.k:
                continue
            if cm not in comp_cache:
                comp_cache[cm] = components_masks(g, cm)
            if all(any(comp & ~al == 0 for al in alloweds)
                   for comp in comp_cache[cm]):
                found = True
                if stats is not None:
                    stats['max_defect_used'] = max(
                        stats.get('max_defect_used', 0), ct_t.bit_count())
                break
        if not found:
            return False
    return True
