"""Sound over-approximation for universal formulas ``forall s1..sn. (chi -> pred)``.

The hyper-safety body ``chi`` prunes the self-composition; the maximal
value of the normalized predicate's left side over all (monolithic)
schedulers of the pruned product bounds it over every scheduler tuple that
satisfies ``chi``.  If that bound respects the comparator the formula holds.
"""

from __future__ import annotations

import time
from fractions import Fraction
from dataclasses import dataclass, field

from phlcheck.analysis.chain import AutomataCache
from phlcheck.analysis.optimize import DEFAULT_MAX_ITER, solve_optimal_value
from phlcheck.analysis.predicate import compare_with_tolerance
from phlcheck.analysis.success import success_sets
from phlcheck.analysis.verdict import Holds, Inconclusive
from phlcheck.automata.dra import DEFAULT_TREE_CAP
from phlcheck.automata.nba import DEFAULT_CLOSURE_CAP
from phlcheck.automata.safety import safety_dfa
from phlcheck.composition import (DEFAULT_SIZE_CAP, product_with_rabin, product_with_safety,
                                  self_compose, trivial_product)
from phlcheck.errors import ClassificationError, ConfigError, DegeneratePredicate, EmptyProduct
from phlcheck.logic import ltl as L
from phlcheck.logic import phl as P
from phlcheck.logic.parser import parse_phl
from phlcheck.logic.printer import predicate_str


@dataclass
class ApproxConfig:
    closure_cap: int = DEFAULT_CLOSURE_CAP
    tree_cap: int = DEFAULT_TREE_CAP
    size_cap: int = DEFAULT_SIZE_CAP
    max_iter: int = DEFAULT_MAX_ITER
    # hand-written automata for the normalized predicate's operands, in term order
    automata: list | None = None


@dataclass
class ApproxResult:
    verdict: object
    c_star: float | None
    bound: float | None
    sizes: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)
    normalized: str = ""
    iterations: int = 0


class _Clock:
    def __init__(self, out: dict):
        self.out = out

    def __call__(self, name):
        clock = self

        class _T:
            def __enter__(self):
                self.t = time.perf_counter()

            def __exit__(self, *exc):
                clock.out[name] = clock.out.get(name, 0.0) + (time.perf_counter() - self.t) * 1e3

        return _T()


def split_constant_terms(pred: P.ProbPredicate):
    """Fold ``P(true)`` and ``P(false)`` into an exact constant; return ``(constant, rest)``."""
    const = Fraction(0)
    rest = []
    for t in pred.terms:
        if isinstance(t.operand, L.Const):
            const += Fraction(t.coeff) * (1 if t.operand.value else 0)
        else:
            rest.append(t)
    return const, P.ProbPredicate(tuple(rest), pred.comparator, Fraction(pred.bound) - const, pred.pos)


def _sign(pred) -> int:
    return 1 if pred.comparator in ("<=", "<") else -1


def approx_check(m, f, cfg: ApproxConfig | None = None) -> ApproxResult:
    cfg = cfg or ApproxConfig()
    timings: dict = {}
    clock = _Clock(timings)
    with clock("parse_ms"):
        if isinstance(f, str):
            f = parse_phl(f)
        frag = P.classify_fragment(f)
        if frag != P.Fragment.UNIVERSAL_IMPLICATION:
            raise ClassificationError(P.fragment_diagnostic(f) or f"formula is in fragment {frag.value}")
        d = P.decompose(f)
    sizes: dict = {"mdp_states": m.num_states, "mdp_transitions": m.num_transitions()}
    diags: list = []
    const, rest = split_constant_terms(d.predicate)
    try:
        pred = P.normalize_predicate(rest)
    except DegeneratePredicate as e:
        pred = None
        folded = e.value
    bound = float(d.predicate.bound)

    with clock("safety_automaton_ms"):
        dfa = safety_dfa(d.hyper, d.sched_vars) if d.hyper is not None else None
    sizes["safety_automaton_states"] = dfa.num_states if dfa is not None else 1
    with clock("self_composition_ms"):
        mc = self_compose(m, d.sched_vars, cfg.size_cap)
    sizes["self_composition_states"] = mc.num_states
    try:
        with clock("safety_product_ms"):
            prod = product_with_safety(mc, dfa, cfg.size_cap) if dfa is not None else trivial_product(mc, cfg.size_cap)
    except EmptyProduct:
        diags.append("no scheduler tuple satisfies the hyper-safety body; the formula holds vacuously")
        sizes["safety_product_states"] = 0
        return ApproxResult(Holds(0.0, bound if bound is not None else 0.0), 0.0, bound, sizes, timings, diags,
                            predicate_str(pred) if pred is not None else "")
    sizes["safety_product_states"] = prod.num_states
    sizes["safety_product_transitions"] = prod.mdp.num_transitions()
    sizes["safety_product_explored"] = prod.explored
    if prod.lost_initial_mass > 0:
        diags.append(
            f"initial mass {prod.lost_initial_mass:.6g} violates the hyper-safety body and is excluded "
            "(no renormalization)")

    if pred is None:
        # every operand is constant: the value is exact
        c = float(const)
        if folded:
            return ApproxResult(Holds(c, bound), c, bound, sizes, timings,
                                diags + ["predicate has only constant operands and holds exactly"])
        return ApproxResult(Inconclusive(c, bound, "predicate has only constant operands and fails exactly"),
                            c, bound, sizes, timings, diags)

    cache = AutomataCache(cfg.closure_cap, cfg.tree_cap)
    with clock("rabin_automata_ms"):
        if cfg.automata is not None:
            if len(cfg.automata) != len(pred.terms):
                raise ConfigError(f"{len(cfg.automata)} automata given for {len(pred.terms)} predicate terms")
            automata = list(cfg.automata)
        else:
            automata = [cache.dra(t.operand) for t in pred.terms]
    with clock("rabin_product_ms"):
        rp = product_with_rabin(prod, automata, cfg.size_cap)
    sizes["rabin_product_states"] = rp.num_states
    sizes["rabin_product_transitions"] = rp.mdp.num_transitions()
    sizes["rabin_automaton_states"] = [a.num_states for a in automata]
    sizes["rabin_pairs"] = [len(g) for g in rp.good]
    with clock("success_sets_ms"):
        table = success_sets(rp)
    sizes["success_set_states"] = {",".join(str(i + 1) for i in sorted(k)): len(v)
                                   for k, v in sorted(table.items(), key=lambda kv: sorted(kv[0]))}
    coeffs = [float(t.coeff) for t in pred.terms]
    with clock("optimization_ms"):
        opt = solve_optimal_value(rp, table, coeffs, max_iter=cfg.max_iter)
    # normalized margin N - b' equals s * (L - b); map the optimum back to the original left side
    c_star = bound + _sign(d.predicate) * (opt.c_star - float(pred.bound))
    ok, edge = compare_with_tolerance(opt.c_star, pred.comparator, pred.bound)
    if edge:
        verdict = Inconclusive(c_star, bound, "c* lies within 1e-9 of the bound")
    elif ok:
        verdict = Holds(c_star, bound)
    else:
        verdict = Inconclusive(c_star, bound, "c* does not meet the bound; the over-approximation cannot decide")
    return ApproxResult(verdict, c_star, bound, sizes, timings, diags, predicate_str(pred), opt.iterations)
