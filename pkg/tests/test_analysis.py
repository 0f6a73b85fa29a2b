import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from generators import chain_of_rows, random_chain_rows, random_mdp
from oracles import (TEMPLATES, bsccs, optimal_stopping_exact, success_set_oracle,
                     template_probability_exact)
from phlcheck.analysis.chain import chain_ltl_probability
from phlcheck.analysis.hyper import check_hyper_body_on_tuple
from phlcheck.analysis.mec import mec_decomposition
from phlcheck.analysis.optimize import STOP, evaluate_policy, solve_optimal_value, value_iteration
from phlcheck.analysis.predicate import compare_with_tolerance, evaluate_predicate
from phlcheck.analysis.success import floors, success_sets
from phlcheck.composition import ProductMdp
from phlcheck.errors import NonConvergence
from phlcheck.logic import ltl as L
from phlcheck.logic import phl as P
from phlcheck.logic.parser import parse_ltl, parse_phl
from phlcheck.mdp import FiniteMemoryScheduler, Mdp, chain_from_rows, induced_chain


def product(m, bad, good):
    """Wrap ``m`` as a product with the given per-automaton pair lists."""
    n = m.num_states
    return ProductMdp(m, tuple((s,) for s in range(n)), tuple((0,) for _ in range(n)),
                      [[frozenset(b) for b in bs] for bs in bad], [[frozenset(g) for g in gs] for gs in good])


def random_product(rng, n, k):
    m = random_mdp(rng, n, max_actions=2)
    bad, good = [], []
    for _ in range(k):
        pairs = rng.randint(1, 2)
        bad.append([{s for s in range(n) if rng.random() < 0.25} for _ in range(pairs)])
        good.append([{s for s in range(n) if rng.random() < 0.4} for _ in range(pairs)])
    return product(m, bad, good)


# --- end components ---------------------------------------------------------

def _closed_and_connected(m, ec):
    for s, acts in ec.actions.items():
        assert acts
        for a in acts:
            assert {t for t, p in m.successors(s, a) if p > 0} <= ec.states
    order = sorted(ec.states)
    succ = {s: {t for a in ec.actions[s] for t, p in m.successors(s, a) if p > 0} for s in order}
    for s in order:
        seen, todo = {s}, [s]
        while todo:
            for t in succ[todo.pop()]:
                if t not in seen:
                    seen.add(t)
                    todo.append(t)
        assert seen == ec.states


def test_mec_examples(branch):
    ecs = mec_decomposition(branch)
    assert [sorted(e.states) for e in ecs] == [[1], [2]]
    # two states swapping under one action, with an escape action from the first
    m = Mdp(["u", "v", "w"], ["go", "out"],
            [[(0, [(1, 1.0)]), (1, [(2, 1.0)])], [(0, [(0, 1.0)])], [(0, [(2, 1.0)])]],
            [(0, 1.0)], [], [(), (), ()])
    ecs = mec_decomposition(m)
    assert [sorted(e.states) for e in ecs] == [[0, 1], [2]]
    assert ecs[0].actions[0] == {0}
    assert mec_decomposition(m, allowed={0, 2}) == [ecs[1]]


def test_mecs_closed_connected_and_cover_support_bsccs():
    rng = random.Random(7)
    for _ in range(30):
        m = random_mdp(rng, rng.randint(2, 5))
        ecs = mec_decomposition(m)
        for ec in ecs:
            _closed_and_connected(m, ec)
        covered = set().union(*(e.states for e in ecs)) if ecs else set()
        # every bottom component of every memoryless policy's graph sits inside one MEC
        from oracles import support_policies
        for pol in support_policies(m):
            rows = [{t: 1 for a in pol[s] for t, p in m.successors(s, a) if p > 0} for s in range(m.num_states)]
            for comp in bsccs(m.num_states, rows):
                assert any(comp <= e.states for e in ecs)
                assert comp <= covered


# --- success sets -------------------------------------------------------------

def test_success_set_absorbing_good():
    m = Mdp(["s", "t"], ["a"], [[(0, [(1, 1.0)])], [(0, [(1, 1.0)])]], [(0, 1.0)], [], [(), ()])
    table = success_sets(product(m, [[set()]], [[{1}]]))
    assert table == {frozenset({0}): frozenset({1})}


def test_success_set_empty_when_bad_is_unavoidable():
    m = Mdp(["g", "b"], ["a"], [[(0, [(1, 1.0)])], [(0, [(0, 1.0)])]], [(0, 1.0)], [], [(), ()])
    table = success_sets(product(m, [[{1}]], [[{0}]]))
    assert table[frozenset({0})] == frozenset()


def hand_product():
    # 0 -x-> {1,2} loop; 0 -y-> 3; 3 <-> 4 with an exit to 5; 5 absorbing
    m = Mdp([f"s{i}" for i in range(6)], ["x", "y"], [
        [(0, [(1, 0.5), (2, 0.5)]), (1, [(3, 1.0)])],
        [(0, [(2, 1.0)]), (1, [(1, 1.0)])],
        [(0, [(1, 1.0)])],
        [(0, [(4, 1.0)])],
        [(0, [(3, 1.0)]), (1, [(5, 1.0)])],
        [(0, [(5, 1.0)])],
    ], [(0, 1.0)], [], [()] * 6)
    bad = [[{2}, {5}], [{4}]]
    good = [[{1}, {3}], [{1, 5}]]
    return product(m, bad, good)


def test_success_sets_hand_product_against_policy_oracle():
    p = hand_product()
    table = success_sets(p)
    for I, states in table.items():
        assert states == success_set_oracle(p, I), sorted(I)
    assert table[frozenset({0})] == {1, 3, 4}
    assert table[frozenset({1})] == {1, 2, 5}
    assert table[frozenset({0, 1})] == {1}


def test_success_sets_random_against_policy_oracle():
    rng = random.Random(11)
    for _ in range(25):
        p = random_product(rng, rng.randint(2, 6), rng.randint(1, 2))
        for I, states in success_sets(p).items():
            assert states == success_set_oracle(p, I)


def test_success_sets_are_unions_of_end_components():
    rng = random.Random(3)
    for _ in range(20):
        p = random_product(rng, 6, 2)
        ecs = mec_decomposition(p.mdp)
        for states in success_sets(p).values():
            for s in states:
                assert any(s in e.states for e in ecs)


def test_runs_meeting_the_conditions_stay_in_the_success_set():
    # sampled runs under random policies: a run that satisfies the conjunction
    # ends in a bottom component that lies inside the success set
    rng = random.Random(5)
    nprng = np.random.default_rng(5)
    checked = 0
    for _ in range(20):
        p = random_product(rng, 6, 2)
        m, n = p.mdp, p.num_states
        table = success_sets(p)
        pol = {s: rng.choice(m.enabled(s)) for s in range(n)}
        rows = [{t: pr for t, pr in m.successors(s, pol[s]) if pr > 0} for s in range(n)]
        comps = bsccs(n, rows)
        comp_of = {s: c for c in comps for s in c}
        cum = np.zeros((n, n))
        for s, r in enumerate(rows):
            for t, pr in r.items():
                cum[s, t] = pr
        cum = np.cumsum(cum, axis=1)
        cum[:, -1] = 1.0
        cur = np.zeros(500, dtype=np.int64)
        for _ in range(200):
            cur = (nprng.random(len(cur))[:, None] >= cum[cur]).sum(axis=1)
        for s in cur:
            comp = comp_of.get(int(s))
            if comp is None:
                continue
            for I, states in table.items():
                ok = all(any(not (comp & p.bad[i][j]) and comp & p.good[i][j] for j in range(len(p.good[i])))
                         for i in I)
                if ok:
                    checked += 1
                    assert comp <= states
    assert checked > 0


# --- optimization -------------------------------------------------------------

def test_single_absorbing_floor():
    m = Mdp(["t"], ["a"], [[(0, [(0, 1.0)])]], [(0, 1.0)], [], [()])
    p = product(m, [[set()]], [[{0}]])
    res = solve_optimal_value(p, success_sets(p), [0.7])
    assert res.c_star == pytest.approx(0.7, abs=1e-12)
    assert res.policy == (STOP,)


def test_max_of_two_floors():
    m = Mdp(["s", "u", "v"], ["l", "r"],
            [[(0, [(1, 1.0)]), (1, [(2, 1.0)])], [(0, [(1, 1.0)])], [(0, [(2, 1.0)])]],
            [(0, 1.0)], [], [(), (), ()])
    p = product(m, [[set()], [set()]], [[{1}], [{2}]])
    table = success_sets(p)
    assert floors(p, table, [0.7, 0.3]) == [0.0, 0.7, 0.3]
    res = solve_optimal_value(p, table, [0.7, 0.3])
    assert res.c_star == pytest.approx(0.7, abs=1e-12)
    assert res.policy[0] == 0


def test_floor_of_joint_success_set_sums_coefficients():
    m = Mdp(["t"], ["a"], [[(0, [(0, 1.0)])]], [(0, 1.0)], [], [()])
    p = product(m, [[set()], [set()]], [[{0}], [{0}]])
    assert floors(p, success_sets(p), [0.5, 0.25]) == [0.75]


def test_random_products_against_exact_policy_iteration():
    rng = random.Random(13)
    for _ in range(25):
        p = random_product(rng, rng.randint(2, 8), rng.randint(1, 2))
        coeffs = [Fraction(rng.randint(1, 4), 4) for _ in range(p.k)]
        table = success_sets(p)
        fl = floors(p, table, [float(c) for c in coeffs])
        exact = optimal_stopping_exact(p.mdp, [Fraction(f) for f in fl])
        res = solve_optimal_value(p, table, [float(c) for c in coeffs])
        assert res.c_star == pytest.approx(float(exact[0]), abs=1e-6)
        assert np.allclose(res.values, [float(v) for v in exact], atol=1e-6)


def test_solution_satisfies_constraints():
    rng = random.Random(17)
    for _ in range(20):
        p = random_product(rng, 6, 2)
        table = success_sets(p)
        res = solve_optimal_value(p, table, [0.5, 1.0])
        x = res.values
        assert np.all(x >= res.floors - 1e-7)
        assert np.all(x >= -1e-12)
        for s in range(p.num_states):
            for a, dist in p.mdp.trans[s]:
                assert sum(pr * x[t] for t, pr in dist) <= x[s] + 1e-7
        assert res.c_star == pytest.approx(sum(pr * x[s] for s, pr in p.mdp.initial()))


def test_value_iteration_is_monotone():
    rng = random.Random(19)
    for _ in range(20):
        p = random_product(rng, 7, 2)
        fl = floors(p, success_sets(p), [0.5, 0.5])
        steps = []
        value_iteration(p.mdp, fl, on_iterate=lambda it, x, nxt: steps.append(bool(np.all(nxt >= x - 1e-15))))
        assert all(steps)


def test_policy_evaluation_attains_the_value():
    # a slow geometric approach to the floor; extraction must still stop correctly
    m = Mdp(["s", "g", "z"], ["a"], [[(0, [(0, 0.9), (1, 0.05), (2, 0.05)])], [(0, [(1, 1.0)])],
                                     [(0, [(2, 1.0)])]], [(0, 1.0)], [], [()] * 3)
    p = product(m, [[set()]], [[{1}]])
    res = solve_optimal_value(p, success_sets(p), [1.0])
    assert res.c_star == pytest.approx(0.5, abs=1e-12)
    assert evaluate_policy(m, res.floors, res.policy)[0] == pytest.approx(0.5, abs=1e-12)


def test_nonconvergence_is_reported():
    m = Mdp(["s", "g", "z"], ["a"], [[(0, [(0, 0.9), (1, 0.05), (2, 0.05)])], [(0, [(1, 1.0)])],
                                     [(0, [(2, 1.0)])]], [(0, 1.0)], [], [()] * 3)
    with pytest.raises(NonConvergence):
        value_iteration(m, [0.0, 1.0, 0.0], max_iter=5)


def test_stopping_oracle_matches_brute_force():
    # the exact oracle itself against enumeration of every stop-or-act policy
    import itertools
    from oracles import solve_exact
    rng = random.Random(23)
    for _ in range(15):
        m = random_mdp(rng, 4)
        fl = [Fraction(rng.randint(0, 4), 4) for _ in range(4)]
        best = Fraction(0)
        for combo in itertools.product(*([None] + list(m.enabled(s)) for s in range(4))):
            x = [None] * 4
            # closed classes that never stop collect 0: iterate reachability to a stop
            stops = {s for s in range(4) if combo[s] is None}
            can = set(stops)
            for _ in range(4):
                can |= {s for s in range(4) if combo[s] is not None and
                        any(pr > 0 and t in can for t, pr in m.successors(s, combo[s]))}
            unk = sorted(can - stops)
            pos = {s: i for i, s in enumerate(unk)}
            a = [[Fraction(int(i == j)) for j in range(len(unk))] for i in range(len(unk))]
            b = [Fraction(0)] * len(unk)
            for s in unk:
                for t, pr in m.successors(s, combo[s]):
                    if t in pos:
                        a[pos[s]][pos[t]] -= Fraction(pr)
                    elif t in stops:
                        b[pos[s]] += Fraction(pr) * fl[t]
            sol = solve_exact(a, b) if unk else []
            v0 = fl[0] if 0 in stops else (sol[pos[0]] if 0 in pos else Fraction(0))
            best = max(best, v0)
        assert optimal_stopping_exact(m, fl)[0] == best


# --- chains -------------------------------------------------------------------

def test_chain_half_reach():
    c = chain_from_rows(["s0", "s1", "s2"], [[(1, 0.5), (2, 0.5)], [(1, 1.0)], [(2, 1.0)]], [(0, 1.0)],
                        [set(), {"a@x"}, set()])
    assert chain_ltl_probability(c, parse_ltl("F a@x")) == pytest.approx(0.5, abs=1e-12)
    assert chain_ltl_probability(c, L.Const(True)) == 1.0


@pytest.mark.parametrize("template", TEMPLATES)
def test_chain_templates_against_exact_solve(template):
    rng = random.Random(29)
    f = parse_ltl(template.replace("a", "a@x").replace("b", "b@x"))
    for _ in range(8):
        rows = random_chain_rows(rng, 6)
        labels = [{p for p in "ab" if rng.random() < 0.5} for _ in range(6)]
        got = chain_ltl_probability(chain_of_rows(rows, labels), f)
        assert got == pytest.approx(float(template_probability_exact(rows, labels, template)), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 4))
def test_complement_probabilities_sum_to_one(seed, size):
    from generators import random_ltl
    rng = random.Random(seed)
    f = random_ltl(rng, size, [L.Atom("a", "x"), L.Atom("b", "x")])
    rows = random_chain_rows(rng, 5)
    c = chain_of_rows(rows, [{p for p in "ab" if rng.random() < 0.5} for _ in range(5)])
    assert chain_ltl_probability(c, f) + chain_ltl_probability(c, L.Not(f)) == pytest.approx(1.0, abs=1e-7)


# --- hyper bodies ---------------------------------------------------------------

AGREE = parse_phl("forall s1. forall s2. (forall p1: s1. forall p2: s2. G (a@p1 <-> a@p2)) -> P(F a@s1) <= 1")


def _body(f):
    return P.decompose(f).hyper


def test_hyper_identical_schedulers(branch):
    alpha1 = FiniteMemoryScheduler.memoryless({0: 0, 1: 0, 2: 1})
    assert check_hyper_body_on_tuple(branch, [alpha1, alpha1], _body(AGREE), ("s1", "s2"))


def test_hyper_diverging_schedulers(branch):
    alpha1 = FiniteMemoryScheduler.memoryless({0: 0, 1: 0, 2: 1})
    alpha2 = FiniteMemoryScheduler.memoryless({0: 1, 1: 0, 2: 1})
    assert not check_hyper_body_on_tuple(branch, [alpha1, alpha2], _body(AGREE), ("s1", "s2"))


def test_hyper_true_matrix(branch):
    f = parse_phl("forall s1. (forall p1: s1. true) -> P(F a@s1) <= 1")
    alpha2 = FiniteMemoryScheduler.memoryless({0: 1, 1: 0, 2: 1})
    assert check_hyper_body_on_tuple(branch, [alpha2], _body(f), ("s1",))


def test_hyper_randomized_scheduler_paths_split(branch):
    # one path variable per copy of the same mixing scheduler: the two paths may diverge
    mix = FiniteMemoryScheduler(1, {(0, 0): {0: 0.5, 1: 0.5}, (0, 1): 0, (0, 2): 1})
    assert not check_hyper_body_on_tuple(branch, [mix, mix], _body(AGREE), ("s1", "s2"))


# --- predicates -----------------------------------------------------------------

def test_predicate_true_bound_one(branch):
    alpha1 = induced_chain(branch, FiniteMemoryScheduler.memoryless({0: 0, 1: 0, 2: 1}))
    pred = P.ProbPredicate((P.Term(Fraction(1), L.Const(True)),), "<=", Fraction(1))
    v = evaluate_predicate(pred, {"s": alpha1})
    assert (v.value, v.satisfied) == (1.0, True)


def test_predicate_next_a_under_alpha1(branch):
    alpha1 = induced_chain(branch, FiniteMemoryScheduler.memoryless({0: 0, 1: 0, 2: 1}))
    pred = P.ProbPredicate((P.Term(Fraction(1), parse_ltl("X a@s")),), ">=", Fraction(1))
    v = evaluate_predicate(pred, {"s": alpha1})
    assert v.value == pytest.approx(1.0, abs=1e-12)
    assert v.satisfied and v.knife_edge


def test_two_robot_predicate_is_sum_of_reachability_solves():
    from oracles import reach_probability_exact
    # robot chains: reach the goal with 0.9 per step, or fall into a trap with 0.1
    r1 = [{1: Fraction(9, 10), 2: Fraction(1, 10)}, {1: Fraction(1)}, {2: Fraction(1)}]
    r2 = [{0: Fraction(1, 2), 1: Fraction(1, 4), 2: Fraction(1, 4)}, {1: Fraction(1)}, {2: Fraction(1)}]
    lab = [set(), {"goal1"}, set()]
    c1 = chain_from_rows(list(range(3)), [sorted((j, float(p)) for j, p in r.items()) for r in r1], [(0, 1.0)], lab)
    c2 = chain_from_rows(list(range(3)), [sorted((j, float(p)) for j, p in r.items()) for r in r2], [(0, 1.0)], lab)
    f = parse_phl("forall s1. forall s2. P(F goal1@s1) - P(F goal1@s2) <= 1/4")
    pred = P.decompose(f).predicate
    v = evaluate_predicate(pred, {"s1": c1, "s2": c2})
    want = reach_probability_exact(3, r1, {1})[0] - reach_probability_exact(3, r2, {1})[0]
    assert v.value == pytest.approx(float(want), abs=1e-12)
    assert v.terms == pytest.approx((0.9, 0.5))
    assert not v.satisfied


@pytest.mark.parametrize("value,cmp,bound,want", [
    (0.5, "<=", "1/2", (True, True)),
    (0.5, "<", "1/2", (False, True)),
    (0.5 + 2e-9, ">", "1/2", (True, False)),
    (0.4, ">=", "1/2", (False, False)),
])
def test_comparison_band(value, cmp, bound, want):
    assert compare_with_tolerance(value, cmp, bound) == want
