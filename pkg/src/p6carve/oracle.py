"""Brute-force oracles.

Everything here is exhaustive and desk-scale: an exact treedepth oracle
over vertex masks, a subset-enumeration solver for the two supported
problems, and enumeration of all minimal chordal completions (hence all
potential maximal cliques) of tiny graphs.  These are the independent
references the fast paths are tested against.
"""

from __future__ import annotations

from .chordal import apply_fill, is_chordal
from .graphs import (Graph, SizeCapError, as_mask, components_masks,
                     iter_bits, set_of)
from .tdforest import set_order_key

MWIS = "MWIS"
FVS = "FVS"

INFEASIBLE = "INFEASIBLE"

PROBLEMS = (MWIS, FVS)

DEFAULT_DEPTH = {MWIS: 1, FVS: 2}

BRUTE_CAP = {MWIS: 16, FVS: 14}


class Instance:
    """A problem instance: graph, positive weights, problem name."""

    __slots__ = ("g", "weights", "problem")

    def __init__(self, g: Graph, weights: list[int] | None, problem: str):
        if problem not in PROBLEMS:
            raise ValueError(f"unknown problem {problem!r}")
        if weights is None:
            weights = [1] * g.n
        if len(weights) != g.n or any(w < 1 for w in weights):
            raise ValueError("need one positive weight per vertex")
        self.g = g
        self.weights = list(weights)
        self.problem = problem


def is_independent_mask(g: Graph, mask: int) -> bool:
    for v in iter_bits(mask):
        if g.adj[v] & mask:
            return False
    return True


def is_forest_mask(g: Graph, mask: int) -> bool:
    edges = sum((g.adj[v] & mask).bit_count() for v in iter_bits(mask)) // 2
    return edges + len(components_masks(g, g.full_mask & ~mask)) == mask.bit_count()


def problem_predicate(problem: str):
    return {MWIS: is_independent_mask, FVS: is_forest_mask}[problem]


class TreedepthOracle:
    """Exact treedepth of induced subgraphs, memoized per graph."""

    def __init__(self, g: Graph):
        self.g = g
        self.memo: dict[int, int] = {0: 0}

    def td(self, mask: int) -> int:
        known = self.memo.get(mask)
        if known is not None:
            return known
        comps = components_masks(self.g, self.g.full_mask & ~mask)
        if len(comps) > 1:
            val = max(self.td(c) for c in comps)
        elif mask.bit_count() == 1:
            val = 1
        else:
            val = 1 + min(self.td(mask & ~(1 << v)) for v in iter_bits(mask))
        self.memo[mask] = val
        return val

    def leq(self, mask: int, d: int) -> bool:
        if mask.bit_count() <= d:
            return True
        return self.td(mask) <= d


def brute_force_solve(inst: Instance, d: int):
    """Exhaustive optimum over Sol = X with the problem predicate and
    treedepth-d realizability; ties broken by the solution set order."""
    g = inst.g
    cap = BRUTE_CAP[inst.problem]
    if g.n > cap:
        raise SizeCapError(
            f"brute force for {inst.problem} capped at n <= {cap}")
    pred = problem_predicate(inst.problem)
    td = TreedepthOracle(g)
    best = None
    best_key = None
    for mask in range(1 << g.n):
        if not pred(g, mask):
            continue
        if not td.leq(mask, d):
            continue
        w = sum(inst.weights[v] for v in iter_bits(mask))
        key = (-w, set_order_key(mask))
        if best_key is None or key < best_key:
            best, best_key = mask, key
    if best is None:
        return INFEASIBLE
    return set_of(best), set_of(best), -best_key[0]


# === minimal triangulation enumeration ===

def _elimination_fills(g: Graph, state_cap: int) -> set[frozenset]:
    """Fills of all elimination orderings, deduped by reached minor."""
    n = g.n
    memo: dict[tuple, set[frozenset]] = {}
    states = 0

    def rec(rem: int, adj: tuple[int, ...]) -> set[frozenset]:
        nonlocal states
        key = (rem, tuple(adj[v] & rem if rem >> v & 1 else 0
                          for v in range(n)))
        hit = memo.get(key)
        if hit is not None:
            return hit
        states += 1
        if states > state_cap:
            raise SizeCapError(
                f"triangulation enumeration exceeded {state_cap} states")
        if rem == 0:
            memo[key] = {frozenset()}
            return memo[key]
        out: set[frozenset] = set()
        for v in iter_bits(rem):
            nb = adj[v] & rem & ~(1 << v)
            nbl = list(iter_bits(nb))
            new_pairs = [(a, b) for i, a in enumerate(nbl)
                         for b in nbl[i + 1:] if not adj[a] >> b & 1]
            adj2 = list(adj)
            for a, b in new_pairs:
                adj2[a] |= 1 << b
                adj2[b] |= 1 << a
            for rest in rec(rem & ~(1 << v), tuple(adj2)):
                out.add(frozenset(new_pairs) | rest)
        memo[key] = out
        return out

    return rec(g.full_mask, tuple(g.adj))


def minimal_triangulations(g: Graph, n_cap: int = 9,
                           state_cap: int = 2_000_000) -> list[tuple]:
    """Every minimal chordal completion of g, as sorted fill tuples.

    Every minimal triangulation is the fill of some elimination ordering,
    so enumerating orderings (with minor-level deduplication) and keeping
    the fills where no single edge is droppable finds them all.
    """
    if g.n > n_cap:
        raise SizeCapError(f"triangulation enumeration capped at n <= {n_cap}")
    out = []
    for fill in _elimination_fills(g, state_cap):
        pairs = sorted(fill)
        if all(not is_chordal(apply_fill(g, [p for p in pairs if p != e]))[0]
               for e in pairs):
            out.append(tuple(pairs))
    return sorted(set(out))


def all_pmcs_oracle(g: Graph, n_cap: int = 9) -> set[frozenset[int]]:
    """Maximal cliques over all minimal triangulations."""
    from .chordal import maximal_cliques_masks
    out: set[frozenset[int]] = set()
    for fill in minimal_triangulations(g, n_cap):
        for m in maximal_cliques_masks(apply_fill(g, fill)):
            out.add(set_of(m))
    return out


def solution_weight(weights: list[int], x) -> int:
    return sum(weights[v] for v in iter_bits(as_mask(x)))
