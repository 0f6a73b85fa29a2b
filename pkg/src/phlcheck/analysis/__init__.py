from phlcheck.analysis.chain import AutomataCache, bottom_sccs, chain_ltl_probability, reach_probability
from phlcheck.analysis.hyper import check_hyper_body_on_chains, check_hyper_body_on_tuple
from phlcheck.analysis.mec import EndComponent, mec_decomposition
from phlcheck.analysis.optimize import OptimizationResult, solve_optimal_value, value_iteration
from phlcheck.analysis.predicate import PredicateValue, compare_with_tolerance, evaluate_predicate
from phlcheck.analysis.success import floors, good_states, success_sets
from phlcheck.analysis.verdict import Holds, Inconclusive, NoWitnessWithinBound, Verdict, WitnessFound

__all__ = [
    "AutomataCache", "EndComponent", "Holds", "Inconclusive", "NoWitnessWithinBound",
    "OptimizationResult", "PredicateValue", "Verdict", "WitnessFound", "bottom_sccs",
    "chain_ltl_probability", "check_hyper_body_on_chains", "check_hyper_body_on_tuple",
    "compare_with_tolerance", "evaluate_predicate", "floors", "good_states", "mec_decomposition",
    "reach_probability", "solve_optimal_value", "success_sets", "value_iteration",
]
