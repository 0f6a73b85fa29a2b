"""The reference implementations checked against each other and against hand values."""

import random
from fractions import Fraction

from generators import random_ltl, random_split_chain_rows
from oracles import (TEMPLATES, LassoTable, all_lassos, lasso_eval, reach_probability_exact, solve_exact,
                     template_probability_exact, template_probability_sampled)
from phlcheck.logic import ltl as L

ATOMS = [L.Atom("p", "x"), L.Atom("q", "x")]


def test_backward_table_matches_direct_evaluation():
    rng = random.Random(43)
    lassos = list(all_lassos(["p@x", "q@x"], 3, 3))
    for _ in range(40):
        f = random_ltl(rng, rng.randint(1, 4), ATOMS)
        sample = rng.sample(lassos, 30)
        table = LassoTable(f).table([s for s, _ in sample], [lp for _, lp in sample])
        for k, (stem, loop) in enumerate(sample):
            assert table[k][k] == lasso_eval(f, list(stem), list(loop))


def test_lasso_hand_values():
    p = frozenset({"p@x"})
    e = frozenset()
    f = L.Always(L.Eventually(ATOMS[0]))
    assert lasso_eval(f, [e, e], [e, p])
    assert not lasso_eval(f, [p], [e])
    assert lasso_eval(L.Until(L.Const(True), ATOMS[0]), [e, e, p], [e])


def test_exact_solver():
    assert solve_exact([[2, 1], [1, 3]], [3, 5]) == [Fraction(4, 5), Fraction(7, 5)]
    rows = [{0: Fraction(1, 2), 1: Fraction(1, 4), 2: Fraction(1, 4)}, {1: Fraction(1)}, {2: Fraction(1)}]
    assert reach_probability_exact(3, rows, {1})[0] == Fraction(1, 2)


def test_sampling_agrees_with_exact_templates():
    rng = random.Random(47)
    rows = random_split_chain_rows(rng, 6)
    labels = [{"a"}, {"a", "b"}, set(), {"a"}, set(), {"b"}]
    for t in TEMPLATES:
        e = float(template_probability_exact(rows, labels, t))
        s = template_probability_sampled(rows, labels, t, 200_000, 1)
        assert abs(e - s) < 1e-2, t
