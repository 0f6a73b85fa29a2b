"""PHL formulas: scheduler quantifiers over hyper bodies and probabilistic predicates."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

from phlcheck import errors
from phlcheck.logic import ltl as L


@dataclass(frozen=True)
class PathQuant:
    kind: str  # "forall" | "exists"
    path: str
    sched: str


@dataclass(frozen=True)
class HyperBody:
    prefix: tuple  # tuple[PathQuant, ...]
    matrix: L.Ltl
    pos: tuple | None = field(default=None, compare=False, repr=False)

    @property
    def universal(self) -> bool:
        return all(q.kind == "forall" for q in self.prefix)

    def path_vars(self) -> tuple:
        return tuple(q.path for q in self.prefix)


@dataclass(frozen=True)
class Term:
    coeff: Fraction
    operand: L.Ltl


@dataclass(frozen=True)
class ProbPredicate:
    terms: tuple  # tuple[Term, ...]
    comparator: str  # "<=", "<", ">=", ">"
    bound: Fraction
    pos: tuple | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Quantified:
    kind: str
    var: str
    body: "Phl"
    pos: tuple | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class PNot:
    arg: "Phl"


@dataclass(frozen=True)
class PAnd:
    left: "Phl"
    right: "Phl"


@dataclass(frozen=True)
class POr:
    left: "Phl"
    right: "Phl"


@dataclass(frozen=True)
class PImplies:
    left: "Phl"
    right: "Phl"


Phl = Quantified | PNot | PAnd | POr | PImplies | HyperBody | ProbPredicate

COMPARATORS = ("<=", "<", ">=", ">")
NEGATED = {">": "<=", ">=": "<", "<": ">=", "<=": ">"}


class Fragment(str, enum.Enum):
    UNIVERSAL_IMPLICATION = "UniversalImplication"
    EXISTENTIAL_CONJUNCTION = "ExistentialConjunction"
    OTHER = "Other"


@dataclass(frozen=True)
class Decomposition:
    """The pieces of a formula in one of the two checkable shapes.

    ``hyper`` is None when the hyper body is absent (trivially true) and
    ``predicate`` is None when the predicate is absent (trivially true).
    """

    kind: str
    sched_vars: tuple
    hyper: HyperBody | None
    predicate: ProbPredicate | None


def split_prefix(f: Phl) -> tuple[list, Phl]:
    """Peel the leading scheduler quantifiers: ([(kind, var), ...], body)."""
    prefix = []
    while isinstance(f, Quantified):
        prefix.append((f.kind, f.var))
        f = f.body
    return prefix, f


def decompose(f: Phl) -> Decomposition | None:
    """Match ``Q s1..Q sn. (chi -> P)`` or ``Q s1..Q sn. (chi /\\ P)`` shapes."""
    prefix, body = split_prefix(f)
    if not prefix:
        return None
    kinds = {k for k, _ in prefix}
    if len(kinds) != 1:
        return None
    kind = kinds.pop()
    var_order = tuple(v for _, v in prefix)
    hyper = pred = None
    if kind == "forall":
        if isinstance(body, ProbPredicate):
            pred = body
        elif isinstance(body, PImplies) and isinstance(body.left, HyperBody) and isinstance(body.right, ProbPredicate):
            hyper, pred = body.left, body.right
        elif isinstance(body, POr):
            sides = (body.left, body.right)
            for a, b in (sides, sides[::-1]):
                if isinstance(a, PNot) and isinstance(a.arg, HyperBody) and isinstance(b, ProbPredicate):
                    hyper, pred = a.arg, b
                    break
            else:
                return None
        else:
            return None
    else:
        if isinstance(body, ProbPredicate):
            pred = body
        elif isinstance(body, HyperBody):
            hyper = body
        elif isinstance(body, PAnd):
            sides = (body.left, body.right)
            for a, b in (sides, sides[::-1]):
                if isinstance(a, HyperBody) and isinstance(b, ProbPredicate):
                    hyper, pred = a, b
                    break
            else:
                return None
        else:
            return None
    return Decomposition(kind, var_order, hyper, pred)


def classify_fragment(f: Phl) -> Fragment:
    d = decompose(f)
    if d is None:
        return Fragment.OTHER
    if d.hyper is not None and not d.hyper.universal:
        return Fragment.OTHER
    if d.kind == "forall":
        if d.predicate is None:
            return Fragment.OTHER
        if d.hyper is not None:
            if not L.is_syntactic_safety(d.hyper.matrix):
                return Fragment.OTHER
            bound = [q.sched for q in d.hyper.prefix]
            if len(bound) != len(set(bound)):
                return Fragment.OTHER
        return Fragment.UNIVERSAL_IMPLICATION
    return Fragment.EXISTENTIAL_CONJUNCTION


def fragment_diagnostic(f: Phl) -> str:
    """Explain why ``f`` is not in a checkable fragment (empty when it is)."""
    d = decompose(f)
    if d is None:
        return ("formula is not of the shape 'forall s.. (chi -> pred)' or "
                "'exists s.. (chi /\\ pred)' with a uniform scheduler prefix")
    if d.hyper is not None and not d.hyper.universal:
        return "hyper body uses existential path quantifiers"
    if d.kind == "forall":
        if d.predicate is None:
            return "universal formula without a probabilistic predicate"
        if d.hyper is not None and not L.is_syntactic_safety(d.hyper.matrix):
            return "hyper body matrix is not a syntactic safety formula (U or F after negation normal form)"
        if d.hyper is not None:
            bound = [q.sched for q in d.hyper.prefix]
            if len(bound) != len(set(bound)):
                return "hyper body binds more than one path variable to a scheduler variable"
    return ""


def negate_comparator(cmp: str) -> str:
    return NEGATED[cmp]


def negate_predicate(p: ProbPredicate) -> ProbPredicate:
    return ProbPredicate(p.terms, NEGATED[p.comparator], p.bound, p.pos)


def _negate_ltl(f: L.Ltl) -> L.Ltl:
    return f.arg if isinstance(f, L.Not) else L.Not(f)


def normalize_predicate(p: ProbPredicate) -> ProbPredicate:
    """Rewrite into ``sum c_i P(phi_i) (<=|<) c`` with every ``c_i > 0``.

    Uses ``P(phi) = 1 - P(!phi)``.  Raises :class:`DegeneratePredicate` when
    no term has a nonzero coefficient.
    """
    terms = [(Fraction(t.coeff), t.operand) for t in p.terms]
    bound = Fraction(p.bound)
    cmp = p.comparator
    if cmp in (">=", ">"):
        terms = [(-c, f) for c, f in terms]
        bound = -bound
        cmp = "<=" if cmp == ">=" else "<"
    out = []
    for c, f in terms:
        if c == 0:
            continue
        if c < 0:
            # c P(f) = c - c P(!f)
            bound -= c
            out.append(Term(-c, _negate_ltl(f)))
        else:
            out.append(Term(c, f))
    if not out:
        raise errors.DegeneratePredicate(compare_exact(Fraction(0), cmp, bound))
    return ProbPredicate(tuple(out), cmp, bound, p.pos)


def compare_exact(value: Fraction, cmp: str, bound: Fraction) -> bool:
    return {"<=": value <= bound, "<": value < bound, ">=": value >= bound, ">": value > bound}[cmp]


def predicate_vars(p: ProbPredicate) -> set:
    out = set()
    for t in p.terms:
        out |= L.variables(t.operand)
    return out


def check_closed(f: Phl) -> None:
    """Raise UnboundVariable / NotWellFormed unless ``f`` is closed and well formed."""
    _check(f, frozenset(), frozenset())


def _check(f, scheds: frozenset, used: frozenset) -> None:
    if isinstance(f, Quantified):
        _check(f.body, scheds | {f.var}, used)
    elif isinstance(f, PNot):
        _check(f.arg, scheds, used)
    elif isinstance(f, (PAnd, POr, PImplies)):
        _check(f.left, scheds, used)
        _check(f.right, scheds, used)
    elif isinstance(f, HyperBody):
        paths: dict = {}
        for q in f.prefix:
            if q.sched not in scheds:
                if q.sched in paths:
                    raise errors.NotWellFormed(f"path quantifier {q.path}:{q.sched} binds to a path variable")
                raise errors.NotWellFormed(
                    f"path quantifier {q.path}:{q.sched} is outside the scope of scheduler {q.sched!r}")
            if q.path in paths or q.path in scheds:
                raise errors.NotWellFormed(f"path variable {q.path!r} bound twice")
            paths[q.path] = q.sched
        for v in L.variables(f.matrix):
            if v in paths:
                continue
            if v in scheds:
                raise errors.NotWellFormed(f"scheduler variable {v!r} indexes an atom inside a hyper body")
            raise errors.UnboundVariable(v)
    elif isinstance(f, ProbPredicate):
        for v in predicate_vars(f):
            if v not in scheds:
                raise errors.UnboundVariable(v)
    else:
        raise TypeError(f"not a PHL formula: {f!r}")
