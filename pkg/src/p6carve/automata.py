"""Threshold automata over labelled forests.

A threshold automaton reads a labelled rooted forest bottom-up.  The
state of a node is a function of its own label and the *capped multiset*
of its children's states: multiplicities above 2*tau are folded into
{tau+1..2*tau} preserving the residue modulo tau, so only boundedly many
child profiles exist.  Acceptance looks at the capped multiset of root
states.

Two concrete automata are provided: one accepting exactly the labelled
structures whose every node carries both membership bits (the
independent-set problem at depth 1), and one accepting exactly the
labelled structures whose selected vertices induce an acyclic graph
(the induced-forest / feedback-vertex-set problem).  The forest
automaton tracks, per subtree, the connectivity blocks of selected
vertices together with the depths of their pending edges toward strict
ancestors; a block acquiring two pending edges to the same selected
ancestor closes a cycle.
"""

from __future__ import annotations

import itertools
from typing import Callable, Iterable, NamedTuple

from .graphs import Graph, iter_bits
from .tdforest import PartialSolution, RootedForest

DEPTH_CAP = 4


class AutomatonError(RuntimeError):
    """The transition function was undefined for an encountered input."""


def cap(k: int, tau: int) -> int:
    """Fold a multiplicity into {0..2*tau} preserving residue mod tau.

    Values up to 2*tau pass through; larger values land in
    {tau+1..2*tau}.  With tau=0 every multiplicity collapses to 0.
    """
    if k < 0:
        raise ValueError("multiplicity must be nonnegative")
    if tau == 0:
        return 0
    if k <= 2 * tau:
        return k
    return k - tau * ((k - tau - 1) // tau)


class CappedMultiset:
    """Multiset of hashable states with multiplicities capped at 2*tau."""

    __slots__ = ("tau", "_counts", "_key")

    def __init__(self, counts: dict, tau: int):
        if tau < 0:
            raise ValueError("tau must be nonnegative")
        self.tau = tau
        self._counts = {s: cap(k, tau) for s, k in counts.items()
                        if cap(k, tau) > 0}
        # states of mixed types (sentinel strings vs. structured tuples)
        # are ordered by repr to keep the key canonical
        self._key = tuple(sorted(self._counts.items(),
                                 key=lambda kv: repr(kv[0])))

    @classmethod
    def from_iter(cls, states: Iterable, tau: int) -> "CappedMultiset":
        counts: dict = {}
        for s in states:
            counts[s] = counts.get(s, 0) + 1
        return cls(counts, tau)

    def count(self, state) -> int:
        return self._counts.get(state, 0)

    def items(self):
        return self._key

    def union(self, other: "CappedMultiset") -> "CappedMultiset":
        if other.tau != self.tau:
            raise ValueError("threshold mismatch")
        counts = dict(self._counts)
        for s, k in other._counts.items():
            counts[s] = counts.get(s, 0) + k
        return CappedMultiset(counts, self.tau)

    def __eq__(self, other) -> bool:
        return (isinstance(other, CappedMultiset)
                and self.tau == other.tau and self._key == other._key)

    def __hash__(self) -> int:
        return hash((self.tau, self._key))

    def __repr__(self) -> str:
        return f"CappedMultiset({dict(self._key)!r}, tau={self.tau})"


def all_multisets(states: tuple, tau: int):
    """Every capped multiset over the given states: (2*tau+1)^|states|."""
    for counts in itertools.product(range(2 * tau + 1), repeat=len(states)):
        yield CappedMultiset(dict(zip(states, counts)), tau)


class Label(NamedTuple):
    """Per-node input symbol: depth, ancestor-adjacency bits, memberships.

    f[i-1] says whether the node is adjacent (in the host graph) to its
    unique strict ancestor at depth i; entries at or below the node's
    own depth are zero.
    """

    h: int
    f: tuple
    in_x: int
    in_sol: int

    def validate(self, d: int) -> None:
        if not 1 <= self.h <= d or len(self.f) != d:
            raise ValueError("label depth out of range")
        if any(self.f[i] and i + 1 >= self.h for i in range(d)):
            raise ValueError("adjacency bit at or below the node's depth")
        if self.in_x not in (0, 1) or self.in_sol not in (0, 1):
            raise ValueError("membership bits must be 0/1")


class LabelledForest(NamedTuple):
    forest: RootedForest
    labels: dict


class ThresholdAutomaton(NamedTuple):
    """states may be None when the state space is generated on the fly;
    accept is either an explicit set of capped multisets or a predicate."""

    states: tuple | None
    tau: int
    delta: Callable
    accept: object
    name: str = ""


def label_structure(g: Graph, ps: PartialSolution) -> LabelledForest:
    f = ps.t.forest
    d = ps.t.d
    labels = {}
    for v in f.parent:
        bits = [0] * d
        for u in iter_bits(f.anc_incl[v] & ~(1 << v)):
            if g.adj[u] >> v & 1:
                bits[f.depth[u] - 1] = 1
        labels[v] = Label(f.depth[v], tuple(bits),
                          ps.x_mask >> v & 1, ps.sol_mask >> v & 1)
    return LabelledForest(f, labels)


def _step(a: ThresholdAutomaton, label, children: CappedMultiset):
    try:
        out = a.delta(label, children)
    except KeyError as exc:
        raise AutomatonError(f"transition undefined for {label}") from exc
    if out is None:
        raise AutomatonError(f"transition undefined for {label}")
    return out


def _accepts(a: ThresholdAutomaton, roots: CappedMultiset) -> bool:
    if callable(a.accept):
        return bool(a.accept(roots))
    return roots in a.accept


def run_states(a: ThresholdAutomaton, lf: LabelledForest) -> dict:
    """The unique bottom-up state map of the automaton on the forest."""
    xi: dict = {}
    for v in lf.forest.nodes_by_depth_desc():
        kids = CappedMultiset.from_iter(
            (xi[c] for c in lf.forest.children[v]), a.tau)
        xi[v] = _step(a, lf.labels[v], kids)
    return xi


def run(a: ThresholdAutomaton, lf: LabelledForest) -> tuple[dict, bool]:
    xi = run_states(a, lf)
    roots = CappedMultiset.from_iter((xi[r] for r in lf.forest.roots), a.tau)
    return xi, _accepts(a, roots)


# ---------------------------------------------------------------- MWIS

MWIS_OK = "ok"
MWIS_BAD = "bad"


def mwis_automaton(d: int = 1) -> ThresholdAutomaton:
    """Accepts iff every node carries in_x = in_sol = 1; at depth 1 the
    underlying structure is automatically an independent set."""
    if d != 1:
        raise ValueError("the independent-set automaton runs at depth 1")
    tau = 1

    def delta(label: Label, children: CappedMultiset):
        if children.count(MWIS_BAD) or not (label.in_x and label.in_sol):
            return MWIS_BAD
        return MWIS_OK

    accept = frozenset(
        m for m in all_multisets((MWIS_OK, MWIS_BAD), tau)
        if m.count(MWIS_BAD) == 0)
    return ThresholdAutomaton((MWIS_OK, MWIS_BAD), tau, delta, accept,
                              "independent-set")


# -------------------------------------------------- induced forest (FVS)

FOREST_BAD = "bad"


def _canon_blocks(pool: dict) -> tuple:
    return tuple(sorted((b, cap(k, 2)) for b, k in pool.items() if k))


def forest_automaton(d: int) -> ThresholdAutomaton:
    """Accepts iff in_x = in_sol everywhere and the selected vertices
    induce an acyclic graph.

    A non-failure state is a capped multiset of *blocks*; a block is the
    trace of one connected set of selected subtree vertices, written as
    a sorted tuple of (ancestor depth, pending-edge count capped at 2)
    pairs.  Processing a node at depth h discharges every pending edge
    of depth h: if the node is selected, each edge attaches its block to
    the node (two edges from one block close a cycle); otherwise the
    edges vanish.  Blocks with no pending edges can never join a cycle
    and are dropped.
    """
    if not 1 <= d <= DEPTH_CAP:
        raise ValueError(f"depth must lie in 1..{DEPTH_CAP}")
    tau = 2

    def delta(label: Label, children: CappedMultiset):
        if children.count(FOREST_BAD):
            return FOREST_BAD
        if label.in_x != label.in_sol:
            return FOREST_BAD
        h = label.h
        pool: dict = {}
        for state, smult in children.items():
            for block, bmult in state:
                pool[block] = pool.get(block, 0) + smult * bmult
        if not label.in_sol:
            out: dict = {}
            for block, k in pool.items():
                rest = tuple((i, c) for i, c in block if i != h)
                if rest:
                    out[rest] = out.get(rest, 0) + k
            return _canon_blocks(out)
        xblock = {i: 1 for i in range(1, h) if label.f[i - 1]}
        out = {}
        for block, k in pool.items():
            pending_here = dict(block).get(h, 0)
            if pending_here == 0:
                out[block] = out.get(block, 0) + k
                continue
            if pending_here >= 2:
                return FOREST_BAD   # two edges from one block to this node
            for i, c in block:
                if i != h:
                    xblock[i] = min(2, xblock.get(i, 0) + c * k)
        if xblock:
            nb = tuple(sorted(xblock.items()))
            out[nb] = out.get(nb, 0) + 1
        return _canon_blocks(out)

    def accept(roots: CappedMultiset) -> bool:
        return roots.count(FOREST_BAD) == 0

    return ThresholdAutomaton(None, tau, delta, accept, "induced-forest")


def automaton_for_problem(problem: str, d: int) -> ThresholdAutomaton:
    from .oracle import FVS, MWIS
    if problem == MWIS:
        return mwis_automaton(d)
    if problem == FVS:
        return forest_automaton(d)
    raise ValueError(f"unknown problem {problem!r}")
