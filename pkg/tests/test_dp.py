"""Template dynamic program: multistate assignments, extension validity,
combination, the per-component gluing subroutine, table invariants, and
end-to-end solves checked against the brute-force oracle."""

import itertools
import random

import pytest

from p6carve.automata import (CappedMultiset, ThresholdAutomaton,
                              forest_automaton, label_structure,
                              mwis_automaton, run_states)
from p6carve.carvers import CarverFamily, build_family, validate_family
from p6carve.chordal import (aligned_minimal_completion, build_clique_tree,
                             enforce_spade)
from p6carve.dp import (ROOT, AuxTable, DpTable, InvariantViolationError,
                        Multistate, PreTemplate, Template, _profile, combine,
                        is_valid_extension, run_subroutine, solve)
from p6carve.generators import gen_gn, gen_random_p6free
from p6carve.graphs import Graph, components_masks, iter_bits, mask_of
from p6carve.oracle import (FVS, INFEASIBLE, MWIS, Instance,
                            brute_force_solve, is_forest_mask,
                            is_independent_mask)
from p6carve.tdforest import (PartialSolution, RootedForest,
                              TreedepthStructure, all_structures,
                              enumerate_maximal_structures,
                              solution_order_key)
from .common import cycle_graph, path_graph, rand_weights, star_graph


def ps_of(parent: dict, d: int, x=(), sol=None) -> PartialSolution:
    """Partial solution from a parent map and vertex collections."""
    sol = x if sol is None else sol
    return PartialSolution(TreedepthStructure(RootedForest(parent), d),
                           mask_of(x), mask_of(sol))


def empty_ps(d: int) -> PartialSolution:
    return ps_of({}, d)


def all_valid_extensions(g: Graph, template: Template,
                         automaton: ThresholdAutomaton) -> list:
    """Every partial solution the template accepts, by exhaustive search
    over structures inside base-union-D and all membership splits."""
    base = template.ps
    d = base.t.d
    allowed = base.t.nodes_mask | template.d_mask
    out = []
    for t in all_structures(g, d):
        nm = t.forest.nodes_mask
        if base.t.nodes_mask & ~nm or nm & ~allowed:
            continue
        extra = sorted(iter_bits(nm & ~base.t.nodes_mask))
        for combo in itertools.product((0, 1, 2), repeat=len(extra)):
            x, sol = base.x_mask, base.sol_mask
            for v, c in zip(extra, combo):
                if c >= 1:
                    sol |= 1 << v
                if c == 2:
                    x |= 1 << v
            cand = PartialSolution(t, x, sol)
            if is_valid_extension(g, template, cand, label_structure,
                                  automaton):
                out.append(cand)
    return out


def best_extensions_by_profile(g: Graph, base: PartialSolution, d_mask: int,
                               automaton: ThresholdAutomaton,
                               weights: list) -> dict:
    """Order-minimal valid extension per realizable multistate assignment,
    by exhaustive search (profiles computed directly from automaton runs)."""
    d = base.t.d
    allowed = base.t.nodes_mask | d_mask
    best: dict = {}
    for t in all_structures(g, d):
        nm = t.forest.nodes_mask
        if base.t.nodes_mask & ~nm or nm & ~allowed:
            continue
        extra = sorted(iter_bits(nm & ~base.t.nodes_mask))
        for combo in itertools.product((0, 1, 2), repeat=len(extra)):
            x, sol = base.x_mask, base.sol_mask
            for v, c in zip(extra, combo):
                if c >= 1:
                    sol |= 1 << v
                if c == 2:
                    x |= 1 << v
            cand = PartialSolution(t, x, sol)
            xi = _profile(base.t.forest, t.forest,
                          run_states(automaton, label_structure(g, cand)),
                          automaton.tau)
            if not is_valid_extension(g, Template(base, None, d_mask, xi),
                                      cand, label_structure, automaton):
                continue
            cur = best.get(xi.key)
            if cur is None or solution_order_key(cand, weights) < \
                    solution_order_key(cur[1], weights):
                best[xi.key] = (xi, cand)
    return best


def reject_all_automaton() -> ThresholdAutomaton:
    return ThresholdAutomaton(("dead",), 1,
                              lambda label, children: "dead",
                              lambda roots: False, "reject-all")


def singleton_state(g: Graph, cand: PartialSolution,
                    automaton: ThresholdAutomaton, v: int):
    return run_states(automaton, label_structure(g, cand))[v]


# ------------------------------------------------------------- multistates


def test_multistate_drops_empty_and_compares_by_content():
    tau = 1
    m = CappedMultiset.from_iter(["q"], tau)
    none = CappedMultiset({}, tau)
    a = Multistate({ROOT: m, 3: none})
    b = Multistate({ROOT: m})
    assert a == b and hash(a) == hash(b)
    assert not a.is_empty() and Multistate.empty().is_empty()
    assert a.get(3) is None and a.get(ROOT) == m


def test_multistate_union_is_slotwise():
    tau = 2
    q = CappedMultiset.from_iter(["q"], tau)
    qq = CappedMultiset.from_iter(["q", "q"], tau)
    r = CappedMultiset.from_iter(["r"], tau)
    u = Multistate({ROOT: q}).union(Multistate({ROOT: q, 2: r}))
    assert u.get(ROOT) == qq and u.get(2) == r
    assert Multistate.empty().union(Multistate({1: q})) == Multistate({1: q})


# ------------------------------------------------------- extension validity


def test_base_is_valid_extension_of_empty_assignment():
    g = path_graph(3)
    a = mwis_automaton(1)
    base = ps_of({0: None}, 1, x=[0])
    t = Template(base, mask_of([1]), mask_of([2]), Multistate.empty())
    assert is_valid_extension(g, t, base, label_structure, a)


def test_extension_outside_d_is_invalid():
    g = Graph(4, [(0, 1), (2, 3)])
    a = mwis_automaton(1)
    base = empty_ps(1)
    cand = ps_of({3: None}, 1, x=[3])
    t = Template(base, mask_of([0, 2]), mask_of([1]), Multistate.empty())
    assert not is_valid_extension(g, t, cand, label_structure, a)


def test_single_new_root_matches_its_run_state():
    g = Graph(4, [(0, 1), (2, 3)])
    a = mwis_automaton(1)
    base = empty_ps(1)
    cand = ps_of({1: None}, 1, x=[1])
    q = singleton_state(g, cand, a, 1)
    xi = Multistate({ROOT: CappedMultiset.from_iter([q], a.tau)})
    good = Template(base, mask_of([0, 2]), mask_of([1]), xi)
    assert is_valid_extension(g, good, cand, label_structure, a)
    wrong_state = Multistate(
        {ROOT: CappedMultiset.from_iter(["bad"], a.tau)})
    assert not is_valid_extension(
        g, Template(base, mask_of([0, 2]), mask_of([1]), wrong_state),
        cand, label_structure, a)
    assert not is_valid_extension(
        g, Template(base, mask_of([0, 2]), mask_of([1]), Multistate.empty()),
        cand, label_structure, a)


def test_extension_must_preserve_base_memberships():
    g = path_graph(3)
    a = mwis_automaton(1)
    base = ps_of({0: None}, 1, x=[0])
    flipped = ps_of({0: None}, 1, x=[])
    t = Template(base, mask_of([1]), mask_of([2]), Multistate.empty())
    assert not is_valid_extension(g, t, flipped, label_structure, a)


def test_new_child_profile_sits_at_its_parent_slot():
    g = path_graph(2)
    a = forest_automaton(2)
    base = ps_of({0: None}, 2, x=[0])
    cand = ps_of({0: None, 1: 0}, 2, x=[0, 1])
    q = singleton_state(g, cand, a, 1)
    xi = Multistate({0: CappedMultiset.from_iter([q], a.tau)})
    t = Template(base, 0, mask_of([1]), xi)
    assert is_valid_extension(g, t, cand, label_structure, a)


# ---------------------------------------------------------------- combine


def mwis_root_setup():
    """2K2 graph, empty base, the two components of g minus {0, 2}."""
    g = Graph(4, [(0, 1), (2, 3)])
    a = mwis_automaton(1)
    base = empty_ps(1)
    c = mask_of([0, 2])
    e1 = ps_of({1: None}, 1, x=[1])
    e2 = ps_of({3: None}, 1, x=[3])
    q1 = singleton_state(g, e1, a, 1)
    q3 = singleton_state(g, e2, a, 3)
    xi1 = Multistate({ROOT: CappedMultiset.from_iter([q1], a.tau)})
    xi2 = Multistate({ROOT: CappedMultiset.from_iter([q3], a.tau)})
    t1 = Template(base, c, mask_of([1]), xi1)
    t2 = Template(base, c, mask_of([3]), xi2)
    return g, a, base, t1, t2, e1, e2


def test_combine_with_base_material_is_identity():
    g, a, base, t1, t2, e1, _ = mwis_root_setup()
    empty_t = Template(base, t1.c_mask, t2.d_mask, Multistate.empty())
    assert combine(e1, base, t1, empty_t, g=g) == e1
    assert combine(base, base, empty_t, empty_t, g=g) == base


def test_combine_two_disjoint_new_roots():
    g, a, base, t1, t2, e1, e2 = mwis_root_setup()
    both = combine(e1, e2, t1, t2, g=g)
    assert both.t.forest.parent == {1: None, 3: None}
    assert both.x == frozenset({1, 3}) and both.sol == frozenset({1, 3})
    union_t = Template(base, t1.c_mask, t1.d_mask | t2.d_mask,
                       t1.xi.union(t2.xi))
    assert is_valid_extension(g, union_t, both, label_structure, a)


def test_combine_rejects_distinct_bases():
    g, a, base, t1, t2, e1, e2 = mwis_root_setup()
    other = ps_of({0: None}, 1, x=[0])
    bad_t2 = Template(other, t2.c_mask, t2.d_mask, t2.xi)
    with pytest.raises(InvariantViolationError):
        combine(e1, e2, t1, bad_t2, g=g)


def test_combine_rejects_shared_node_with_two_parents():
    g = path_graph(3)
    base = empty_ps(2)
    e1 = ps_of({1: None}, 2, x=[1])
    e2 = ps_of({0: None, 1: 0}, 2, x=[0, 1])
    t = Template(base, 0, g.full_mask, Multistate.empty())
    with pytest.raises(InvariantViolationError):
        combine(e1, e2, t, t)


def test_combine_rejects_membership_clash_on_shared_node():
    g = path_graph(2)
    base = empty_ps(1)
    e1 = ps_of({0: None}, 1, x=[0])
    e2 = ps_of({0: None}, 1, x=[], sol=[0])
    t = Template(base, 0, g.full_mask, Multistate.empty())
    with pytest.raises(InvariantViolationError):
        combine(e1, e2, t, t)


def test_combine_rejects_edge_between_new_parts():
    g = path_graph(2)
    base = empty_ps(1)
    e1 = ps_of({0: None}, 1, x=[0])
    e2 = ps_of({1: None}, 1, x=[1])
    t1 = Template(base, 0, mask_of([0]), Multistate.empty())
    t2 = Template(base, 0, mask_of([1]), Multistate.empty())
    with pytest.raises(InvariantViolationError):
        combine(e1, e2, t1, t2, g=g)
    # without the graph the structural union is still produced
    merged = combine(e1, e2, t1, t2)
    assert merged.t.forest.parent == {0: None, 1: None}


# ------------------------------------------------------------- table rules


def test_table_update_is_strictly_monotone():
    g = Graph(3, [])
    weights = [1, 5, 1]
    a = mwis_automaton(1)
    table = DpTable(g, weights, a)
    base = empty_ps(1)
    d_mask = mask_of([1, 2])
    worse = ps_of({2: None}, 1, x=[2])
    better = ps_of({1: None}, 1, x=[1])
    q = singleton_state(g, worse, a, 2)
    xi = Multistate({ROOT: CappedMultiset.from_iter([q], a.tau)})
    assert table.update(base, d_mask, xi, worse) is True
    assert table.lookup(base, d_mask, xi) == worse
    assert table.update(base, d_mask, xi, worse) is False     # tied
    assert table.update(base, d_mask, xi, better) is True     # heavier X
    assert table.lookup(base, d_mask, xi) == better
    assert table.update(base, d_mask, xi, worse) is False     # regression
    assert table.lookup(base, d_mask, xi) == better
    assert table.fill_count() == 1 and table.writes == 2


def test_table_implicit_base_entry():
    g = Graph(2, [])
    a = mwis_automaton(1)
    table = DpTable(g, [1, 1], a)
    base = ps_of({0: None}, 1, x=[0])
    d_mask = mask_of([1])
    assert table.lookup(base, d_mask, Multistate.empty()) == base
    assert table.update(base, d_mask, Multistate.empty(), base) is False
    assert table.fill_count() == 0


# --------------------------------------------------------------- subroutine


def test_subroutine_empty_sequence_keeps_only_the_base():
    g = star_graph(3)
    a = mwis_automaton(1)
    table = DpTable(g, [1] * 4, a)
    base = empty_ps(1)
    aux = run_subroutine(g, PreTemplate(base, mask_of([0])), [], table)
    assert isinstance(aux, AuxTable) and aux.r == 0
    assert aux.row(0) == [(Multistate.empty(), base)]
    assert aux.lookup(0, Multistate.empty()) == base


def test_subroutine_on_empty_table_carries_the_base():
    g = star_graph(3)
    a = mwis_automaton(1)
    table = DpTable(g, [1] * 4, a)
    base = empty_ps(1)
    comps = sorted(components_masks(g, mask_of([0])))
    aux = run_subroutine(g, PreTemplate(base, mask_of([0])), comps, table)
    assert aux.r == len(comps)
    for j in range(aux.r + 1):
        assert aux.row(j) == [(Multistate.empty(), base)]


def test_subroutine_rows_match_exhaustive_search():
    g = star_graph(4)
    weights = [1, 3, 2, 1, 1]
    a = mwis_automaton(1)
    table = DpTable(g, weights, a)
    base = empty_ps(1)
    c_mask = mask_of([0])
    comps = sorted(components_masks(g, c_mask))
    for dm in comps:
        for xi, cand in best_extensions_by_profile(
                g, base, dm, a, weights).values():
            if not xi.is_empty():
                table.update(base, dm, xi, cand)
    for r in (1, 2, 3, 4):
        aux = run_subroutine(g, PreTemplate(base, c_mask), comps[:r], table)
        prefix = 0
        for dm in comps[:r]:
            prefix |= dm
        expected = best_extensions_by_profile(g, base, prefix, a, weights)
        got = {xi.key: (xi, e) for xi, e in aux.row(r)}
        assert set(got) == set(expected)
        for key, (xi, e) in got.items():
            assert solution_order_key(e, weights) == \
                solution_order_key(expected[key][1], weights)


# ------------------------------------------------- uniqueness invariants


def test_order_keys_never_tie_across_distinct_solutions():
    g = Graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    weights = [2, 1, 2, 1]
    seen = {}
    for t in all_structures(g, 2):
        nodes = sorted(iter_bits(t.forest.nodes_mask))
        for combo in itertools.product((0, 1, 2), repeat=len(nodes)):
            x = sol = 0
            for v, c in zip(nodes, combo):
                if c >= 1:
                    sol |= 1 << v
                if c == 2:
                    x |= 1 << v
            ps = PartialSolution(t, x, sol)
            key = solution_order_key(ps, weights)
            assert key not in seen or seen[key] == ps
            seen[key] = ps


def test_each_template_has_a_unique_minimal_extension():
    g = path_graph(4)
    weights = [1, 1, 1, 1]
    a = forest_automaton(2)
    base = ps_of({0: None}, 2, x=[0])
    d_mask = mask_of([2, 3])
    by_profile: dict = {}
    for t in all_structures(g, 2):
        nm = t.forest.nodes_mask
        if base.t.nodes_mask & ~nm or nm & ~(base.t.nodes_mask | d_mask):
            continue
        extra = sorted(iter_bits(nm & ~base.t.nodes_mask))
        for combo in itertools.product((0, 1, 2), repeat=len(extra)):
            x, sol = base.x_mask, base.sol_mask
            for v, c in zip(extra, combo):
                if c >= 1:
                    sol |= 1 << v
                if c == 2:
                    x |= 1 << v
            cand = PartialSolution(t, x, sol)
            xi = _profile(base.t.forest, t.forest,
                          run_states(a, label_structure(g, cand)), a.tau)
            if is_valid_extension(g, Template(base, None, d_mask, xi), cand,
                                  label_structure, a):
                by_profile.setdefault(xi.key, []).append(cand)
    assert by_profile
    for cands in by_profile.values():
        keys = sorted(solution_order_key(c, weights) for c in cands)
        assert all(keys[i] < keys[i + 1] for i in range(len(keys) - 1))


# ------------------------------------------------------------- end to end


def test_solve_mwis_on_c5():
    g = cycle_graph(5)
    fam = build_family(g, 1, 1)
    sol, x, weight = solve(g, None, fam, mwis_automaton(1),
                           x_equals_sol=True)
    assert weight == 2 and len(x) == 2 and sol == x
    assert is_independent_mask(g, mask_of(x))


def test_solve_fvs_on_c4():
    g = cycle_graph(4)
    fam = build_family(g, 2, 2)
    sol, x, weight = solve(g, None, fam, forest_automaton(2),
                           x_equals_sol=True)
    assert weight == 3 and len(x) == 3 and sol == x
    assert is_forest_mask(g, mask_of(x))


def test_solve_empty_graph():
    g = Graph(0, [])
    fam = CarverFamily([], 1, 1)
    assert solve(g, None, fam, mwis_automaton(1)) == (frozenset(),
                                                      frozenset(), 0)


def test_solve_reports_infeasible_when_nothing_is_accepted():
    g = path_graph(3)
    fam = build_family(g, 1, 1)
    assert solve(g, None, fam, reject_all_automaton()) is INFEASIBLE


def test_solve_weight_is_sum_over_x():
    g = path_graph(5)
    w = [3, 10, 1, 10, 3]
    fam = build_family(g, 1, 1)
    sol, x, weight = solve(g, w, fam, mwis_automaton(1), x_equals_sol=True)
    assert weight == sum(w[v] for v in x) == 20
    assert x == {1, 3}


def test_solve_mwis_matches_oracle_on_random_graphs():
    rng = random.Random(4201)
    for trial in range(30):
        n = rng.randint(2, 9)
        g = gen_random_p6free(n, rng.uniform(0.2, 0.7), 4300 + trial)
        w = rand_weights(rng, n)
        fam = build_family(g, 1, 1)
        got = solve(g, w, fam, mwis_automaton(1), x_equals_sol=True)
        want = brute_force_solve(Instance(g, w, MWIS), 1)
        assert got == want, (trial, got, want)


def test_solve_fvs_matches_oracle_on_random_graphs():
    rng = random.Random(880)
    for trial in range(10):
        n = rng.randint(3, 6)
        g = gen_random_p6free(n, rng.uniform(0.3, 0.7), 8900 + trial)
        w = rand_weights(rng, n)
        fam = build_family(g, 2, 2)
        got = solve(g, w, fam, forest_automaton(2), x_equals_sol=True)
        want = brute_force_solve(Instance(g, w, FVS), 2)
        assert got == want, (trial, got, want)


def bag_family(g: Graph, d: int, k: int) -> CarverFamily:
    """Family made of every clique-tree bag over the structure-aligned
    completions of all maximal structures; valid by construction because
    each bag covers itself."""
    bags = set()
    for t in enumerate_maximal_structures(g, d):
        ct = enforce_spade(g, build_clique_tree(
            g, aligned_minimal_completion(g, t)))
        bags.update(b for b in ct.bags if b)
    return CarverFamily(bags, d, k)


def test_solve_mwis_on_layered_example_graph_with_bag_family():
    g = gen_gn(2)
    fam = bag_family(g, 1, 1)
    for t in enumerate_maximal_structures(g, 1):
        assert validate_family(g, fam, t)
    got = solve(g, None, fam, mwis_automaton(1), x_equals_sol=True)
    want = brute_force_solve(Instance(g, None, MWIS), 1)
    assert got == want
