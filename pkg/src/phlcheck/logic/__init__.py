"""PHL and LTL syntax: AST, parser, printer, normalization and classification."""

from phlcheck.logic.ltl import (
    Always, And, Atom, Const, Eventually, FALSE, Iff, Implies, Ltl, Next, Not, Or, TRUE,
    Until, WeakUntil, atoms, desugar, is_syntactic_safety, nnf,
)
from phlcheck.logic.parser import parse_ltl, parse_phl
from phlcheck.logic.phl import (
    Decomposition, Fragment, HyperBody, PAnd, PathQuant, PImplies, PNot, POr, ProbPredicate,
    Quantified, Term, check_closed, classify_fragment, decompose, negate_predicate,
    normalize_predicate,
)
from phlcheck.logic.printer import ltl_str, pretty_print
