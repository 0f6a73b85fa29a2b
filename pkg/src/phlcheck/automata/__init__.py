from phlcheck.automata.dra import Dra, ExplicitDra, nba_to_dra
from phlcheck.automata.hoa import parse_dra
from phlcheck.automata.nba import Nba, accepts_from, all_letters, ltl_to_nba, nba_accepts_lasso, run_prefix
from phlcheck.automata.safety import SafetyDfa, build_safety_dfa, safety_dfa

__all__ = [
    "Dra", "ExplicitDra", "Nba", "SafetyDfa", "accepts_from", "all_letters", "build_safety_dfa",
    "ltl_to_nba", "nba_accepts_lasso", "nba_to_dra", "parse_dra", "run_prefix", "safety_dfa",
]
