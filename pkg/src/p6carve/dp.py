"""Carver-driven dynamic program for maximum-weight sparse solutions.

The solver grows partial solutions (a treedepth-bounded structure together
with nested solution sets ``X subseteq Sol``) through a table keyed by
*templates*.  A template fixes a base partial solution, a carver member
``C`` from the family, a union ``D`` of components of ``G - C``, and a
*multistate assignment* ``xi`` describing, per slot, the capped multiset of
automaton states that the part of the final solution growing inside ``D``
must present: one multiset for the new roots and one for the new children
of each base node.  The table stores, per template, the best-so-far valid
extension under the canonical solution order.

The run proceeds in rounds.  The first round enumerates every extension of
a base that adds at most the leaf budget of fresh material inside a single
component (these are exactly the candidates derivable from base-only
tables).  Later rounds re-process only the pre-template pairs whose input
buckets changed, gluing a stored extension of one pre-template onto a
compatible one via the ancestor-closure extraction step, until no table
entry improves.  Reads within a round see the table as it stood when the
round started; writes are buffered and merged monotonically at round end,
which is equivalent to running the full sequence of pair sweeps because
updates only ever move entries toward a schedule-independent fixpoint.

The final step runs the per-component gluing subroutine over *all*
components of ``G - C`` for every admissible pre-template and returns the
best automaton-accepted combination, or reports infeasibility.
"""

from __future__ import annotations

import itertools
import logging
from typing import Iterable, NamedTuple, Optional

from .automata import (CappedMultiset, ThresholdAutomaton, label_structure,
                       run, run_states)
from .carvers import CarverFamily
from .graphs import Graph, SizeCapError, components_masks, iter_bits, set_of
from .oracle import INFEASIBLE
from .tdforest import (BETTER, PartialSolution, RootedForest,
                       TreedepthStructure, appendable_mask, compare_solutions,
                       solution_order_key, validate_structure)

LOG = logging.getLogger("p6carve.dp")

#: Slot index used for the multiset of states of new roots (the forests
#: themselves only use non-negative vertex numbers).
ROOT = -1

#: Hard cap on the number of enumerated base shapes / base partial
#: solutions; exceeding it raises :class:`SizeCapError` instead of silently
#: grinding through an oversized configuration space.
TRIPLE_CAP = 200_000

#: Safety bound on improvement rounds; the monotone table must quiesce long
#: before this, so hitting the bound indicates a bug rather than a big input.
ROUND_CAP = 10_000

_UNSEEN = object()  # cache sentinel distinct from a ``None`` (reject) result


class InvariantViolationError(RuntimeError):
    """Raised when combine inputs break the compatibility contract."""


# ---------------------------------------------------------------- multistates


class Multistate:
    """Sparse assignment of capped multisets of automaton states to slots.

    Slots are ``ROOT`` (for new roots) or vertex numbers of the base
    structure (for new children of that node).  Slots holding an empty
    multiset are dropped, so object equality coincides with equality of
    the induced total assignments.  ``key`` is hashable; ``skey`` is a
    deterministic, orderable rendering used only to fix iteration orders.
    """

    __slots__ = ("at", "key", "skey")

    def __init__(self, at: Optional[dict] = None):
        clean = {slot: m for slot, m in (at or {}).items() if m.items()}
        self.at = clean
        self.key = tuple(sorted(clean.items(), key=lambda kv: kv[0]))
        self.skey = tuple(
            (slot, tuple((repr(s), c) for s, c in m.items()))
            for slot, m in self.key)

    @classmethod
    def empty(cls) -> "Multistate":
        return cls()

    def is_empty(self) -> bool:
        return not self.at

    def get(self, slot: int) -> Optional[CappedMultiset]:
        return self.at.get(slot)

    def union(self, other: "Multistate") -> "Multistate":
        """Slot-wise capped multiset union."""
        at = dict(self.at)
        for slot, m in other.at.items():
            cur = at.get(slot)
            at[slot] = m if cur is None else cur.union(m)
        return Multistate(at)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Multistate):
            return self.key == other.key
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"Multistate({dict(self.key)!r})"


# ------------------------------------------------------------------ templates


class PreTemplate(NamedTuple):
    """A base partial solution together with the carver member it leans on."""

    ps: PartialSolution
    c_mask: int


class Template(NamedTuple):
    """Pre-template plus a component union ``D`` and a multistate ``xi``.

    ``c_mask`` may be ``None`` where the carver member is irrelevant (the
    validity of an extension never references it).
    """

    ps: PartialSolution
    c_mask: Optional[int]
    d_mask: int
    xi: Multistate

    @property
    def pre(self) -> PreTemplate:
        return PreTemplate(self.ps, self.c_mask)

    def is_simple(self, g: Graph, k: int) -> bool:
        """Whether the base has at most ``k`` leaves and ``D`` is a single
        component of ``g`` minus the member."""
        if self.c_mask is None:
            return False
        if _leaves_mask(self.ps.t.forest).bit_count() > k:
            return False
        return self.d_mask in components_masks(g, self.c_mask)


def _leaves_mask(f: RootedForest) -> int:
    mask = 0
    for v in f.parent:
        if not f.children[v]:
            mask |= 1 << v
    return mask


def _profile(base: RootedForest, cand: RootedForest, xi_run: dict,
             tau: int) -> Multistate:
    """The multiset summary a candidate shows its base: states of new roots
    under ``ROOT`` and, per base node, the states of its new children."""
    at: dict = {}
    new_roots = [z for z in cand.roots if z not in base.parent]
    if new_roots:
        at[ROOT] = CappedMultiset.from_iter(
            (xi_run[z] for z in new_roots), tau)
    for v in base.parent:
        kids = [z for z in cand.children[v] if z not in base.parent]
        if kids:
            at[v] = CappedMultiset.from_iter((xi_run[z] for z in kids), tau)
    return Multistate(at)


def _extends_into(template: Template, candidate: PartialSolution) -> bool:
    """Structural half of extension validity: the base is preserved (nodes,
    parents, memberships) and all new nodes lie inside ``D``."""
    base = template.ps
    bf, cf = base.t.forest, candidate.t.forest
    if candidate.t.d != base.t.d:
        return False
    if bf.nodes_mask & ~cf.nodes_mask:
        return False
    for v in bf.parent:
        if cf.parent[v] != bf.parent[v]:
            return False
    if candidate.x_mask & bf.nodes_mask != base.x_mask:
        return False
    if candidate.sol_mask & bf.nodes_mask != base.sol_mask:
        return False
    return not (cf.nodes_mask & ~bf.nodes_mask & ~template.d_mask)


def is_valid_extension(g: Graph, template: Template,
                       candidate: PartialSolution, labeller,
                       automaton: ThresholdAutomaton) -> bool:
    """Whether ``candidate`` extends the template's base inside ``D`` and its
    automaton run realizes the template's multistate assignment.

    The check is total: it also returns False when ``candidate`` fails to be
    an extension at all (missing base node, changed parent or membership).
    """
    if not _extends_into(template, candidate):
        return False
    base = template.ps
    xi_run = run_states(automaton, labeller(g, candidate))
    return _profile(base.t.forest, candidate.t.forest, xi_run,
                    automaton.tau) == template.xi


def combine(e1: PartialSolution, e2: PartialSolution,
            t1: Template, t2: Template,
            g: Optional[Graph] = None) -> PartialSolution:
    """Component-wise union of two extensions of one base partial solution.

    For extensions growing into disjoint component unions the result is a
    valid extension of the template with the united ``D`` and the slot-wise
    union of the multistate assignments, and combining not-worse inputs
    yields a not-worse output.  Raises :class:`InvariantViolationError` when
    the inputs are incompatible: different bases, a shared node with two
    parents or clashing memberships, or (checkable only when ``g`` is
    given) an edge between the two new parts.
    """
    b1, b2 = t1.ps, t2.ps
    if b1.key != b2.key or b1.t.d != b2.t.d:
        raise InvariantViolationError(
            "extensions combine only over a common base")
    f1, f2 = e1.t.forest, e2.t.forest
    parent = dict(f1.parent)
    for v, p in f2.parent.items():
        if v in parent and parent[v] != p:
            raise InvariantViolationError(
                f"shared node {v} has two different parents")
        parent[v] = p
    shared = f1.nodes_mask & f2.nodes_mask
    if (e1.x_mask ^ e2.x_mask) & shared or (e1.sol_mask ^ e2.sol_mask) & shared:
        raise InvariantViolationError(
            "memberships disagree on a shared node")
    if g is not None:
        base_nodes = b1.t.nodes_mask
        new1 = f1.nodes_mask & ~base_nodes & ~f2.nodes_mask
        new2 = f2.nodes_mask & ~base_nodes & ~f1.nodes_mask
        for u in iter_bits(new1):
            if g.adj[u] & new2:
                raise InvariantViolationError(
                    "edge between the two new parts")
    t = TreedepthStructure(RootedForest(parent), b1.t.d)
    return PartialSolution(t, e1.x_mask | e2.x_mask,
                           e1.sol_mask | e2.sol_mask)


# -------------------------------------------------------------------- tables


class DpTable:
    """Best-so-far valid extensions keyed by (base, ``D``, ``xi``).

    Entries are independent of the carver member of the template: whether a
    candidate is a valid extension never references the member, so a single
    bucket serves every template sharing the base and ``D``.  The entry at
    ``xi = empty`` is implicit because the base itself is its unique valid
    extension; it is never stored and updates targeting it are rejected.
    Stored entries only ever change to a strictly better valid extension.
    """

    __slots__ = ("g", "weights", "automaton", "labeller", "buckets", "writes",
                 "_okeys", "_runs", "_valid_ts")

    def __init__(self, g: Graph, weights: list, automaton: ThresholdAutomaton,
                 labeller=label_structure):
        self.g = g
        self.weights = weights
        self.automaton = automaton
        self.labeller = labeller
        self.buckets: dict = {}
        self.writes = 0
        self._okeys: dict = {}
        self._runs: dict = {}
        self._valid_ts: set = set()

    def order_key(self, ps: PartialSolution) -> tuple:
        """Memoized canonical order key; smaller keys are preferred."""
        k = (ps.t.forest.key, ps.x_mask, ps.sol_mask)
        got = self._okeys.get(k)
        if got is None:
            got = self._okeys[k] = solution_order_key(ps, self.weights)
        return got

    def run_on(self, ps: PartialSolution) -> dict:
        """Memoized automaton state map of a partial solution."""
        k = (ps.t.forest.key, ps.x_mask, ps.sol_mask)
        xi_run = self._runs.get(k)
        if xi_run is None:
            xi_run = self._runs[k] = run_states(
                self.automaton, self.labeller(self.g, ps))
        return xi_run

    def _structure_ok(self, t: TreedepthStructure) -> bool:
        key = t.forest.key
        if key in self._valid_ts:
            return True
        if validate_structure(self.g, t):
            self._valid_ts.add(key)
            return True
        return False

    def bucket(self, base: PartialSolution, d_mask: int) -> dict:
        """Mapping ``xi.key -> (xi, extension)`` for one (base, D) slice."""
        return self.buckets.get((base.key, d_mask), {})

    def lookup(self, base: PartialSolution, d_mask: int,
               xi: Multistate) -> Optional[PartialSolution]:
        if xi.is_empty():
            return base
        entry = self.bucket(base, d_mask).get(xi.key)
        return None if entry is None else entry[1]

    def fill_count(self) -> int:
        return sum(len(b) for b in self.buckets.values())

    def update(self, base: PartialSolution, d_mask: int, xi: Multistate,
               cand: PartialSolution) -> bool:
        """Install ``cand`` if strictly better than the current entry."""
        if xi.is_empty():
            # The base is the unique valid extension of the empty assignment.
            assert cand.key == base.key
            return False
        key = (base.key, d_mask)
        bucket = self.buckets.get(key)
        if bucket is None:
            bucket = self.buckets[key] = {}
        cur = bucket.get(xi.key)
        if cur is not None and \
                self.order_key(cand) >= self.order_key(cur[1]):
            return False
        assert self._structure_ok(cand.t)
        assert _extends_into(Template(base, None, d_mask, xi), cand)
        assert _profile(base.t.forest, cand.t.forest, self.run_on(cand),
                        self.automaton.tau) == xi
        bucket[xi.key] = (xi, cand)
        self.writes += 1
        return True


class AuxTable:
    """Rows ``0..r`` of the per-component gluing subroutine's table."""

    __slots__ = ("rows",)

    def __init__(self, rows: list):
        self.rows = rows

    @property
    def r(self) -> int:
        return len(self.rows) - 1

    def lookup(self, j: int, xi: Multistate) -> Optional[PartialSolution]:
        entry = self.rows[j].get(xi.key)
        return None if entry is None else entry[1]

    def row(self, j: int) -> list:
        """Deterministically ordered ``(xi, extension)`` pairs of row j."""
        return sorted(self.rows[j].values(), key=lambda e: e[0].skey)


def run_subroutine(g: Graph, pre: PreTemplate, component_seq: list,
                   table: DpTable) -> AuxTable:
    """Fold the table's buckets for ``pre`` over a component sequence.

    Row 0 holds only the base at the empty assignment.  Row j improves over
    all ways of combining a row j-1 entry with a stored extension into the
    j-th component (the implicit base entry of each bucket contributes the
    carry-over combination), keeping the best result per united assignment.
    """
    base = pre.ps
    empty = Multistate.empty()
    rows = [{empty.key: (empty, base)}]
    prefix = 0
    for dm in component_seq:
        prev = rows[-1]
        nxt = dict(prev)
        bucket = table.bucket(base, dm)
        entries = sorted(bucket.values(), key=lambda e: e[0].skey)
        for xi1, e1 in sorted(prev.values(), key=lambda e: e[0].skey):
            t1 = Template(base, pre.c_mask, prefix, xi1)
            for xi2, e2 in entries:
                t2 = Template(base, pre.c_mask, dm, xi2)
                cand = combine(e1, e2, t1, t2, g=g)
                xiu = xi1.union(xi2)
                cur = nxt.get(xiu.key)
                if cur is None or \
                        compare_solutions(cand, cur[1], table.weights) == BETTER:
                    nxt[xiu.key] = (xiu, cand)
        rows.append(nxt)
        prefix |= dm
    return AuxTable(rows)


# ------------------------------------------------------------------- engine


class _Triple:
    """A base partial solution plus cached masks and its shape index."""

    __slots__ = ("idx", "shape", "ps", "nodes_mask", "leaves_mask")

    def __init__(self, idx: int, shape: int, ps: PartialSolution,
                 leaves_mask: int):
        self.idx = idx
        self.shape = shape
        self.ps = ps
        self.nodes_mask = ps.t.nodes_mask
        self.leaves_mask = leaves_mask


class _Restr:
    """An interned ancestor-closure restriction of a glued extension:
    closure mask, parents along the closure in vertex order, restricted
    memberships, and the per-triple overlay outcomes built from it."""

    __slots__ = ("a_mask", "ptup", "x0a", "s0a", "results")

    def __init__(self, a_mask: int, ptup: tuple, x0a: int, s0a: int):
        self.a_mask = a_mask
        self.ptup = ptup
        self.x0a = x0a
        self.s0a = s0a
        self.results: dict = {}


class _Engine:
    """One solve run: enumeration, seeding, improvement rounds, finalize."""

    def __init__(self, g: Graph, weights: list, fam: CarverFamily,
                 automaton: ThresholdAutomaton, labeller, d: int, k: int,
                 x_equals_sol: bool, triple_cap: int):
        self.g = g
        self.weights = weights
        self.automaton = automaton
        self.labeller = labeller
        self.d = d
        self.k = k
        self.tau = automaton.tau
        self.x_equals_sol = x_equals_sol
        self.table = DpTable(g, weights, automaton, labeller)
        self.members = [(c, tuple(sorted(components_masks(g, c))))
                        for c in fam.masks]
        self.member_comp_sets = [frozenset(comps) for _, comps in self.members]
        self.shapes = self._enumerate_shapes(triple_cap)
        self.triples = self._expand_triples(triple_cap)
        self.linked = [self._linked_triples(c) for c, _ in self.members]
        self.linked_sets = [set(lst) for lst in self.linked]
        self.sigma_keys = sorted(
            {(t_idx, dm)
             for ci, (_, comps) in enumerate(self.members)
             for t_idx in self.linked[ci] for dm in comps})
        self.sigma_by_triple: dict = {}
        for i, dm in self.sigma_keys:
            self.sigma_by_triple.setdefault(i, []).append(dm)
        self.triples_by_shape: dict = {}
        for t in self.triples:
            self.triples_by_shape.setdefault(t.shape, []).append(t.idx)
        # linkage only inspects a triple's vertex and leaf sets, which all
        # triples of one shape share, so sigma components group per shape
        self.sigma_by_shape: dict = {}
        for i, dm in self.sigma_keys:
            self.sigma_by_shape.setdefault(self.triples[i].shape, set()).add(dm)
        self.sigma_by_shape = {si: tuple(sorted(dms))
                               for si, dms in self.sigma_by_shape.items()}
        self.pending: dict = {}
        self._pair_cache: dict = {}
        self._shape_partner_cache: dict = {}
        self._seed_struct_cache: dict = {}
        self._fold_cache: dict = {}
        self._restr_cache: dict = {}
        self._bucket_rows_cache: dict = {}
        self._restr_intern: dict = {}
        self._forest_cache: dict = {}
        self._xi_union_cache: dict = {}

    # -- enumeration ------------------------------------------------------

    def _enumerate_shapes(self, cap: int) -> list:
        """All structures of the graph with at most ``k`` leaves, via DFS
        node insertion; every ancestor-closed prefix of a target shape has
        at most as many leaves, so pruning on the leaf budget is lossless."""
        g, d, k = self.g, self.d, self.k
        shapes = []
        seen = {()}
        stack = [RootedForest({})]
        while stack:
            f = stack.pop()
            shapes.append(f)
            if len(shapes) > cap:
                raise SizeCapError(
                    f"more than {cap} base shapes; raise the cap to proceed")
            nodes = f.nodes_mask
            for u in range(g.n):
                if nodes >> u & 1:
                    continue
                tn = g.adj[u] & nodes
                placements = []
                if tn == 0:
                    placements.append(None)
                for v in sorted(f.parent):
                    if f.depth[v] < d and not (tn & ~f.anc_incl[v]):
                        placements.append(v)
                for p in placements:
                    pm = dict(f.parent)
                    pm[u] = p
                    key = tuple(sorted(
                        (vv, -1 if pp is None else pp)
                        for vv, pp in pm.items()))
                    if key in seen:
                        continue
                    internal = {pp for pp in pm.values() if pp is not None}
                    if len(pm) - len(internal) > k:
                        continue
                    seen.add(key)
                    stack.append(RootedForest(pm))
        shapes.sort(key=lambda f: f.key)
        return shapes

    def _expand_triples(self, cap: int) -> list:
        opts = ((0, 0), (1, 1)) if self.x_equals_sol \
            else ((0, 0), (0, 1), (1, 1))
        triples = []
        for si, f in enumerate(self.shapes):
            t = TreedepthStructure(f, self.d)
            vs = sorted(f.parent)
            lm = _leaves_mask(f)
            for combo in itertools.product(opts, repeat=len(vs)):
                x = sol = 0
                for v, (bx, bs) in zip(vs, combo):
                    x |= bx << v
                    sol |= bs << v
                triples.append(_Triple(len(triples), si,
                                       PartialSolution(t, x, sol), lm))
                if len(triples) > cap:
                    raise SizeCapError(
                        f"more than {cap} base partial solutions; "
                        f"raise the cap to proceed")
        return triples

    def _linked_triples(self, c_mask: int) -> list:
        """Triples admissible for member ``c``: every leaf inside ``c`` and
        at most ``k`` structure vertices held by ``c``."""
        return [t.idx for t in self.triples
                if not (t.leaves_mask & ~c_mask)
                and (t.nodes_mask & c_mask).bit_count() <= self.k]

    # -- shape-pair compatibility -----------------------------------------

    def _pair(self, si: int, sj: int):
        """Union structure and its appendable-vertex mask for a compatible
        shape pair, or None when the shapes are incompatible."""
        key = (si, sj)
        if key in self._pair_cache:
            return self._pair_cache[key]
        fi, fj = self.shapes[si], self.shapes[sj]
        shared = fi.nodes_mask & fj.nodes_mask
        ok = all(fi.parent[v] == fj.parent[v] for v in iter_bits(shared))
        if ok:
            only_i = fi.nodes_mask & ~fj.nodes_mask
            only_j = fj.nodes_mask & ~fi.nodes_mask
            ok = all(not (self.g.adj[u] & only_j) for u in iter_bits(only_i))
        if not ok:
            info = None
        else:
            pm = dict(fi.parent)
            pm.update(fj.parent)
            ut = TreedepthStructure(RootedForest(pm), self.d)
            info = (ut, appendable_mask(self.g, ut))
        self._pair_cache[key] = info
        return info

    # -- round-1 seeding ---------------------------------------------------

    def _seed_structs(self, si: int, d_mask: int) -> list:
        """Structure extensions of a shape whose new nodes live inside
        ``d_mask``, with at most ``k`` fresh leaves (new nodes without new
        children); ancestor-closed prefixes respect the same budget, so the
        DFS prunes losslessly."""
        key = (si, d_mask)
        cached = self._seed_struct_cache.get(key)
        if cached is not None:
            return cached
        g, d, k = self.g, self.d, self.k
        f0 = self.shapes[si]
        base_nodes = f0.nodes_mask
        out = []
        seen = {f0.key}
        stack = [f0]
        while stack:
            f = stack.pop()
            if f.nodes_mask & ~base_nodes:
                out.append(f)
            for u in iter_bits(d_mask & ~f.nodes_mask):
                tn = g.adj[u] & f.nodes_mask
                placements = []
                if tn == 0:
                    placements.append(None)
                for v in sorted(f.parent):
                    if f.depth[v] < d and not (tn & ~f.anc_incl[v]):
                        placements.append(v)
                for p in placements:
                    pm = dict(f.parent)
                    pm[u] = p
                    fkey = tuple(sorted(
                        (vv, -1 if pp is None else pp)
                        for vv, pp in pm.items()))
                    if fkey in seen:
                        continue
                    new = [vv for vv in pm if not (base_nodes >> vv & 1)]
                    new_parents = {pm[vv] for vv in new
                                   if pm[vv] is not None
                                   and not (base_nodes >> pm[vv] & 1)}
                    if len(new) - len(new_parents) > k:
                        continue
                    seen.add(fkey)
                    stack.append(RootedForest(pm))
        out.sort(key=lambda f: f.key)
        self._seed_struct_cache[key] = out
        return out

    def _seed_round(self) -> None:
        opts = ((0, 0), (1, 1)) if self.x_equals_sol \
            else ((0, 0), (0, 1), (1, 1))
        for i, d_mask in self.sigma_keys:
            tri = self.triples[i]
            for f in self._seed_structs(tri.shape, d_mask):
                new_vs = sorted(iter_bits(f.nodes_mask & ~tri.nodes_mask))
                ut = TreedepthStructure(f, self.d)
                for combo in itertools.product(opts, repeat=len(new_vs)):
                    x, sol = tri.ps.x_mask, tri.ps.sol_mask
                    for v, (bx, bs) in zip(new_vs, combo):
                        x |= bx << v
                        sol |= bs << v
                    cand = PartialSolution(ut, x, sol)
                    xi = _profile(tri.ps.t.forest, f, self._run_on(cand),
                                  self.tau)
                    self._pend(i, d_mask, xi, cand)

    # -- table write buffering ---------------------------------------------

    def _pend(self, i: int, d_mask: int, xi: Multistate,
              cand: PartialSolution) -> None:
        bucket = self.pending.setdefault((i, d_mask), {})
        cur = bucket.get(xi.key)
        if cur is None or \
                self.table.order_key(cand) < self.table.order_key(cur[1]):
            bucket[xi.key] = (xi, cand)

    def _flush(self) -> set:
        dirty = set()
        for (i, d_mask) in sorted(self.pending):
            tri = self.triples[i]
            for xi, cand in sorted(self.pending[(i, d_mask)].values(),
                                   key=lambda e: e[0].skey):
                if self.table.update(tri.ps, d_mask, xi, cand):
                    dirty.add((i, d_mask))
        self.pending = {}
        return dirty

    # -- improvement rounds --------------------------------------------------

    def _mk_forest(self, pm: dict) -> RootedForest:
        """Shared forest objects keyed by the canonical parent listing."""
        key = tuple(sorted((v, -1 if p is None else p) for v, p in pm.items()))
        f = self._forest_cache.get(key)
        if f is None:
            f = self._forest_cache[key] = RootedForest(pm)
        return f

    def _run_on(self, cand: PartialSolution) -> dict:
        """Automaton state map of a candidate, shared across every pair that
        constructs the same candidate (and with the table's own checks)."""
        return self.table.run_on(cand)

    def _xi_union(self, xi1: Multistate, xi2: Multistate) -> Multistate:
        if xi1.is_empty():
            return xi2
        if xi2.is_empty():
            return xi1
        key = (xi1.key, xi2.key)
        got = self._xi_union_cache.get(key)
        if got is None:
            got = self._xi_union_cache[key] = xi1.union(xi2)
        return got

    def _bucket_row(self, j: int, dm: int) -> list:
        """Round-stable, deterministically ordered bucket content."""
        key = (j, dm)
        row = self._bucket_rows_cache.get(key)
        if row is None:
            bucket = self.table.bucket(self.triples[j].ps, dm)
            row = sorted(bucket.values(), key=lambda e: e[0].skey)
            self._bucket_rows_cache[key] = row
        return row

    def _fold(self, j: int, comps: tuple) -> list:
        """Last row of the gluing subroutine for triple ``j`` over ``comps``,
        reading the table as of the current round start; returns the row as
        a deterministically sorted list of ``(xi, extension)`` pairs."""
        key = (j, comps)
        cached = self._fold_cache.get(key)
        if cached is not None:
            return cached
        order = self.table.order_key
        base = self.triples[j].ps
        empty = Multistate.empty()
        cur = {empty.key: (empty, base)}
        for dm in comps:
            entries = self._bucket_row(j, dm)
            if not entries:
                continue
            nxt = dict(cur)
            for xi1, e1 in cur.values():
                for xi2, e2 in entries:
                    cand = self._union_ps(e1, e2)
                    xiu = self._xi_union(xi1, xi2)
                    got = nxt.get(xiu.key)
                    if got is None or order(cand) < order(got[1]):
                        nxt[xiu.key] = (xiu, cand)
            cur = nxt
        row = sorted(cur.values(), key=lambda e: e[0].skey)
        self._fold_cache[key] = row
        return row

    def _union_ps(self, e1: PartialSolution,
                  e2: PartialSolution) -> PartialSolution:
        pm = dict(e1.t.forest.parent)
        pm.update(e2.t.forest.parent)
        return PartialSolution(TreedepthStructure(self._mk_forest(pm), self.d),
                               e1.x_mask | e2.x_mask,
                               e1.sol_mask | e2.sol_mask)

    def _shape_partners(self, sj: int) -> list:
        """Shapes compatible with shape ``sj`` that carry at least one sigma
        key, with the pair's appendable mask."""
        cached = self._shape_partner_cache.get(sj)
        if cached is not None:
            return cached
        out = []
        for si in range(len(self.shapes)):
            if si not in self.sigma_by_shape:
                continue
            info = self._pair(si, sj)
            if info is not None:
                out.append((si, info[1]))
        self._shape_partner_cache[sj] = out
        return out

    def _process_shape(self, sj: int, comps: tuple, js: list,
                       dirty: set) -> None:
        """One agenda group: every consumer triple of shape ``sj`` linked to
        a member whose components are ``comps``.

        Partner shapes are first folded into plans keyed by the component
        selection they induce and then by their vertex-set mask, because
        rows, restrictions and the inside-the-component filter only depend
        on those; the memberships distinguishing individual triples are kept
        as per-consumer agree lists and only drive the innermost overlay."""
        triples = self.triples
        plans: dict = {}
        for si, app in self._shape_partners(sj):
            ti_list = self.triples_by_shape[si]
            tn = triples[ti_list[0]].nodes_mask
            agree_by_j = None
            for d_mask in self.sigma_by_shape[si]:
                useful = tuple(dm for dm in comps if app & dm & d_mask)
                if not useful:
                    continue
                if agree_by_j is None:
                    agree_by_j = {}
                    for j in js:
                        trj = triples[j]
                        tjn = trj.nodes_mask
                        tjx, tjs = trj.ps.x_mask, trj.ps.sol_mask
                        ag = [i for i in ti_list
                              if not (((triples[i].ps.x_mask ^ tjx)
                                       | (triples[i].ps.sol_mask ^ tjs))
                                      & triples[i].nodes_mask & tjn)]
                        if ag:
                            agree_by_j[j] = ag
                if not agree_by_j:
                    break
                bytn = plans.setdefault((useful, d_mask), {})
                cur = bytn.get(tn)
                if cur is None:
                    bytn[tn] = {j: list(ag) for j, ag in agree_by_j.items()}
                else:
                    for j, ag in agree_by_j.items():
                        got = cur.get(j)
                        if got is None:
                            cur[j] = list(ag)
                        else:
                            got.extend(ag)
        for (useful, d_mask), bytn in plans.items():
            for j in js:
                if not any((j, dm) in dirty for dm in useful):
                    continue
                restr = None
                for tn, abj in bytn.items():
                    ag = abj.get(j)
                    if not ag:
                        continue
                    if restr is None:
                        restr = self._restrictions(j, useful, d_mask)
                        if not restr:
                            break
                    flt = [r for om, r in restr if not (om & ~tn)]
                    if not flt:
                        continue
                    for i in ag:
                        self._extract(i, d_mask, flt)

    def _restrictions(self, j: int, useful: tuple, d_mask: int) -> list:
        """Ancestor-closure restrictions of the glued extensions of a row as
        ``(closure part outside the component, interned restriction)`` pairs,
        shared by every partner triple consuming the same row and component."""
        key = (j, useful, d_mask)
        got = self._restr_cache.get(key)
        if got is None:
            intern = self._restr_intern
            out = []
            for xi0, e0 in self._fold(j, useful):
                if xi0.is_empty():
                    continue  # base-material candidates come from seeding
                f0 = e0.t.forest
                dam = f0.nodes_mask & d_mask
                if dam == 0:
                    continue
                anc = f0.anc_incl
                a_mask = 0
                for v in iter_bits(dam):
                    a_mask |= anc[v]
                par = f0.parent
                ptup = tuple(par[v] for v in iter_bits(a_mask))
                ik = (a_mask, ptup, e0.x_mask & a_mask, e0.sol_mask & a_mask)
                r = intern.get(ik)
                if r is None:
                    r = intern[ik] = _Restr(*ik)
                out.append((a_mask & ~d_mask, r))
            got = self._restr_cache[key] = out
        return got

    def _extract(self, i: int, d_mask: int, flt: list) -> None:
        """Candidate step: overlay restricted glued extensions onto the
        sigma-side base and buffer each coherent overlay.

        The constructed candidate depends only on the restriction and the
        base triple, so the outcome lives on the interned restriction and is
        replayed as a cheap buffered write for every other component
        producing the same restriction.
        """
        tri = self.triples[i]
        pend = self._pend
        for r in flt:
            got = r.results.get(i, _UNSEEN)
            if got is not _UNSEEN:
                if got is not None and d_mask not in got[2]:
                    got[2].add(d_mask)
                    pend(i, d_mask, got[0], got[1])
                continue
            res = self._build_candidate(tri, r)
            if res is None:
                r.results[i] = None
            else:
                r.results[i] = (res[0], res[1], {d_mask})
                pend(i, d_mask, res[0], res[1])

    def _build_candidate(self, tri: "_Triple", r: _Restr):
        """Overlay an ancestor-closure restriction onto ``tri``; returns
        ``(profile, candidate)`` or ``None`` when the overlay is
        incoherent."""
        a_mask = r.a_mask
        tn = tri.nodes_mask
        fi = tri.ps.t.forest
        pm = dict(zip(iter_bits(a_mask), r.ptup))
        shared = a_mask & tn
        if any(pm[v] != fi.parent[v] for v in iter_bits(shared)):
            return None
        new = a_mask & ~tn
        other = tn & ~a_mask
        if any(self.g.adj[u] & other for u in iter_bits(new)):
            return None
        if r.x0a & tn & ~tri.ps.x_mask:
            return None
        if r.s0a & tn & ~tri.ps.sol_mask:
            return None
        pm.update(fi.parent)
        cf = self._mk_forest(pm)
        ut = TreedepthStructure(cf, self.d)
        if not validate_structure(self.g, ut):
            return None
        cand = PartialSolution(ut, r.x0a | tri.ps.x_mask,
                               r.s0a | tri.ps.sol_mask)
        xi_star = _profile(fi, cf, self._run_on(cand), self.tau)
        return xi_star, cand

    # -- driver ---------------------------------------------------------------

    def run_solve(self) -> Optional[PartialSolution]:
        LOG.info("dp: %d members, %d shapes, %d triples, %d sigma keys",
                 len(self.members), len(self.shapes), len(self.triples),
                 len(self.sigma_keys))
        self.pending = {}
        self._seed_round()
        dirty = self._flush()
        rounds = 0
        while dirty:
            rounds += 1
            if rounds > ROUND_CAP:
                raise RuntimeError("improvement rounds exceeded safety cap")
            self._fold_cache.clear()
            self._restr_cache.clear()
            self._bucket_rows_cache.clear()
            agenda = {(j, ci)
                      for (j, dm) in dirty
                      for ci in range(len(self.members))
                      if dm in self.member_comp_sets[ci]
                      and j in self.linked_sets[ci]}
            groups: dict = {}
            for j, ci in agenda:
                key = (self.triples[j].shape, self.members[ci][1])
                groups.setdefault(key, set()).add(j)
            LOG.info("dp round %d: %d dirty buckets, %d consumer "
                     "pre-templates, %d stored entries", rounds, len(dirty),
                     len(agenda), self.table.fill_count())
            self.pending = {}
            for (sj, comps) in sorted(groups):
                self._process_shape(sj, comps, sorted(groups[(sj, comps)]),
                                    dirty)
            dirty = self._flush()
        LOG.info("dp: table quiesced after %d improvement rounds, "
                 "%d writes, %d stored entries", rounds, self.table.writes,
                 self.table.fill_count())
        return self._finalize()

    def _finalize(self) -> Optional[PartialSolution]:
        self._fold_cache.clear()
        self._restr_cache.clear()
        self._bucket_rows_cache.clear()
        order = self.table.order_key
        accept_memo: dict = {}
        best = None
        for ci, (_, comps) in enumerate(self.members):
            for j in self.linked[ci]:
                for _, e0 in self._fold(j, comps):
                    ekey = (e0.t.forest.key, e0.x_mask, e0.sol_mask)
                    ok = accept_memo.get(ekey)
                    if ok is None:
                        _, ok = run(self.automaton, self.labeller(self.g, e0))
                        accept_memo[ekey] = ok
                    if ok and (best is None or order(e0) < order(best)):
                        best = e0
        return best


# -------------------------------------------------------------------- solve


def solve(g: Graph, w: Optional[Iterable], fam: CarverFamily,
          automaton: ThresholdAutomaton, labeller=label_structure,
          d: Optional[int] = None, k: Optional[int] = None, *,
          x_equals_sol: bool = False, triple_cap: int = TRIPLE_CAP):
    """Best automaton-accepted solution of the carver-driven program.

    Returns ``(sol, x, weight)`` with ``weight`` the sum of weights over
    ``x``, or :data:`INFEASIBLE` when no accepted combination exists.  The
    caller supplies a carver family valid for ``g`` at depth ``d`` and
    defect ``k`` (defaulting to the family's own parameters).  Setting
    ``x_equals_sol`` restricts the search to candidates with ``X = Sol``,
    which is lossless for automata that reject any node where the two
    memberships differ.
    """
    n = g.n
    weights = [1] * n if w is None else list(w)
    if len(weights) != n:
        raise ValueError("need one weight per vertex")
    if d is None:
        d = fam.d
    if k is None:
        k = fam.k
    if d < 1 or k < 1:
        raise ValueError("depth and defect bounds must be at least 1")
    if n == 0:
        return frozenset(), frozenset(), 0
    engine = _Engine(g, weights, fam, automaton, labeller, d, k,
                     x_equals_sol, triple_cap)
    best = engine.run_solve()
    if best is None:
        return INFEASIBLE
    weight = sum(weights[v] for v in iter_bits(best.x_mask))
    return set_of(best.sol_mask), set_of(best.x_mask), weight
