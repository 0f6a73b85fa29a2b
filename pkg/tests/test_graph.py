import random

from hypothesis import given, strategies as st

from phlcheck.graph import backward_reach, forward_reach, is_nontrivial, scc


def closure(n, succ):
    reach = []
    for i in range(n):
        seen, todo = {i}, [i]
        while todo:
            for v in succ[todo.pop()]:
                if v not in seen:
                    seen.add(v)
                    todo.append(v)
        reach.append(seen)
    return reach


graphs = st.integers(1, 8).flatmap(
    lambda n: st.lists(st.lists(st.integers(0, n - 1), max_size=3), min_size=n, max_size=n))


@given(graphs)
def test_scc_matches_mutual_reachability(succ):
    n = len(succ)
    reach = closure(n, succ)
    comps = scc(n, succ)
    assert sorted(v for c in comps for v in c) == list(range(n))
    for c in comps:
        for u in c:
            assert {v for v in range(n) if u in reach[v] and v in reach[u]} == set(c)


@given(graphs)
def test_reachability(succ):
    n = len(succ)
    reach = closure(n, succ)
    assert forward_reach(succ, [0]) == reach[0]
    assert backward_reach(succ, [0]) == {v for v in range(n) if 0 in reach[v]}


def test_trivial_components():
    succ = [[1], [], [2]]
    comps = {tuple(sorted(c)): c for c in scc(3, succ)}
    assert not is_nontrivial(comps[(0,)], succ)
    assert is_nontrivial(comps[(2,)], succ)


def test_deep_chain_does_not_recurse():
    n = 20000
    succ = [[i + 1] for i in range(n - 1)] + [[0]]
    assert len(scc(n, succ)) == 1
