"""Pretty printer whose output parses back to the same AST."""

from __future__ import annotations

from fractions import Fraction

from phlcheck.logic import ltl as L
from phlcheck.logic import phl as P

# binding strength; higher binds tighter
_LTL_LEVEL = {L.Iff: 1, L.Implies: 2, L.Or: 3, L.And: 4, L.Until: 5, L.WeakUntil: 5}
_LTL_OP = {L.Iff: "<->", L.Implies: "->", L.Or: "\\/", L.And: "/\\", L.Until: "U", L.WeakUntil: "W"}
_RIGHT_ASSOC = (L.Implies, L.Until, L.WeakUntil)
_UNARY_OP = {L.Not: "!", L.Next: "X ", L.Eventually: "F ", L.Always: "G "}


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def ltl_str(f: L.Ltl) -> str:
    return _ltl(f, 0)


def _ltl(f: L.Ltl, ctx: int) -> str:
    if isinstance(f, L.Const):
        return "true" if f.value else "false"
    if isinstance(f, L.Atom):
        return f.key
    if isinstance(f, tuple(_UNARY_OP)):
        return _UNARY_OP[type(f)] + _ltl(f.arg, 6)
    level = _LTL_LEVEL[type(f)]
    if type(f) in _RIGHT_ASSOC:
        lctx, rctx = level + 1, level
    else:
        lctx, rctx = level, level + 1
    s = f"{_ltl(f.left, lctx)} {_LTL_OP[type(f)]} {_ltl(f.right, rctx)}"
    return f"({s})" if level < ctx else s


_PHL_LEVEL = {P.PImplies: 1, P.POr: 2, P.PAnd: 3}
_PHL_OP = {P.PImplies: "->", P.POr: "\\/", P.PAnd: "/\\"}


def pretty_print(f: P.Phl) -> str:
    return _phl(f, 0)


def _phl(f: P.Phl, ctx: int) -> str:
    if isinstance(f, P.Quantified):
        s = f"{f.kind} {f.var}. {_phl(f.body, 0)}"
        return f"({s})" if ctx > 0 else s
    if isinstance(f, P.HyperBody):
        s = hyper_str(f)
        return f"({s})" if ctx > 0 else s
    if isinstance(f, P.ProbPredicate):
        return predicate_str(f)
    if isinstance(f, P.PNot):
        return "!" + _phl(f.arg, 4)
    level = _PHL_LEVEL[type(f)]
    if isinstance(f, P.PImplies):
        lctx, rctx = level + 1, level
    else:
        lctx, rctx = level, level + 1
    s = f"{_phl(f.left, lctx)} {_PHL_OP[type(f)]} {_phl(f.right, rctx)}"
    return f"({s})" if level < ctx else s


def hyper_str(h: P.HyperBody) -> str:
    quants = " ".join(f"{q.kind} {q.path}: {q.sched}." for q in h.prefix)
    return f"{quants} {ltl_str(h.matrix)}"


def predicate_str(p: P.ProbPredicate) -> str:
    parts = []
    for i, t in enumerate(p.terms):
        c = Fraction(t.coeff)
        mag = abs(c)
        body = f"P({ltl_str(t.operand)})" if mag == 1 else f"{format_rational(mag)} * P({ltl_str(t.operand)})"
        if i == 0:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append(("- " if c < 0 else "+ ") + body)
    bound = Fraction(p.bound)
    b = ("-" if bound < 0 else "") + format_rational(abs(bound))
    return f"{' '.join(parts)} {p.comparator} {b}"
