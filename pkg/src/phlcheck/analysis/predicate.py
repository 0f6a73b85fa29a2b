"""Evaluating probabilistic predicates on induced chains."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from phlcheck.analysis.chain import AutomataCache, chain_ltl_probability
from phlcheck.logic import ltl as L
from phlcheck.logic.phl import ProbPredicate

TOLERANCE = 1e-9


@dataclass(frozen=True)
class PredicateValue:
    value: float
    satisfied: bool
    knife_edge: bool
    terms: tuple  # per-term probabilities


def compare_with_tolerance(value: float, cmp: str, bound, tol: float = TOLERANCE) -> tuple[bool, bool]:
    """``(satisfied, knife_edge)``; knife edge means ``|value - bound| <= tol``."""
    c = float(Fraction(bound))
    edge = abs(value - c) <= tol
    if cmp == "<=":
        ok = value <= c + tol
    elif cmp == "<":
        ok = value < c - tol
    elif cmp == ">=":
        ok = value >= c - tol
    else:
        ok = value > c + tol
    return ok, edge


def evaluate_predicate(pred: ProbPredicate, member_chains: dict, composed=None,
                       cache: AutomataCache | None = None) -> PredicateValue:
    """Evaluate ``sum c_i P(phi_i)``.

    Operands over a single scheduler variable ``v`` run on ``member_chains[v]``
    with propositions indexed by ``v``; operands mixing variables run on the
    chain returned by the zero-argument callable ``composed`` whose labels are
    already indexed.
    """
    cache = cache or AutomataCache()
    suffixed: dict = {}
    joint = None
    probs = []
    total = 0.0
    for t in pred.terms:
        vs = L.variables(t.operand)
        if len(vs) == 0:
            pr = chain_ltl_probability(next(iter(member_chains.values())), t.operand, cache) \
                if not isinstance(t.operand, L.Const) else (1.0 if t.operand.value else 0.0)
        elif len(vs) == 1:
            v = next(iter(vs))
            ch = suffixed.get(v)
            if ch is None:
                ch = suffixed[v] = member_chains[v].with_suffix(v)
            pr = chain_ltl_probability(ch, t.operand, cache)
        else:
            if joint is None:
                joint = composed()
            pr = chain_ltl_probability(joint, t.operand, cache)
        probs.append(pr)
        total += float(t.coeff) * pr
    ok, edge = compare_with_tolerance(total, pred.comparator, pred.bound)
    return PredicateValue(total, ok, edge, tuple(probs))
