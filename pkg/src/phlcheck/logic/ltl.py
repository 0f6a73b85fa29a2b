"""LTL abstract syntax over indexed atoms ``name@var``."""

from __future__ import annotations

from dataclasses import dataclass


class Ltl:
    __slots__ = ()

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)


@dataclass(frozen=True)
class Const(Ltl):
    value: bool


@dataclass(frozen=True)
class Atom(Ltl):
    name: str
    var: str

    @property
    def key(self) -> str:
        return f"{self.name}@{self.var}"


@dataclass(frozen=True)
class Not(Ltl):
    arg: Ltl


@dataclass(frozen=True)
class And(Ltl):
    left: Ltl
    right: Ltl


@dataclass(frozen=True)
class Or(Ltl):
    left: Ltl
    right: Ltl


@dataclass(frozen=True)
class Implies(Ltl):
    left: Ltl
    right: Ltl


@dataclass(frozen=True)
class Iff(Ltl):
    left: Ltl
    right: Ltl


@dataclass(frozen=True)
class Next(Ltl):
    arg: Ltl


@dataclass(frozen=True)
class Until(Ltl):
    left: Ltl
    right: Ltl


@dataclass(frozen=True)
class WeakUntil(Ltl):
    left: Ltl
    right: Ltl


@dataclass(frozen=True)
class Eventually(Ltl):
    arg: Ltl


@dataclass(frozen=True)
class Always(Ltl):
    arg: Ltl


TRUE = Const(True)
FALSE = Const(False)

UNARY = (Not, Next, Eventually, Always)
BINARY = (And, Or, Implies, Iff, Until, WeakUntil)


def children(f: Ltl) -> tuple:
    if isinstance(f, UNARY):
        return (f.arg,)
    if isinstance(f, BINARY):
        return (f.left, f.right)
    return ()


def atoms(f: Ltl) -> set:
    if isinstance(f, Atom):
        return {f}
    out = set()
    for c in children(f):
        out |= atoms(c)
    return out


def atom_keys(f: Ltl) -> frozenset:
    return frozenset(a.key for a in atoms(f))


def variables(f: Ltl) -> set:
    return {a.var for a in atoms(f)}


def size(f: Ltl) -> int:
    return 1 + sum(size(c) for c in children(f))


def rename(f: Ltl, mapping) -> Ltl:
    """Replace atom variables via ``mapping`` (dict or callable)."""
    get = mapping if callable(mapping) else (lambda v: mapping.get(v, v))
    if isinstance(f, Atom):
        return Atom(f.name, get(f.var))
    if isinstance(f, UNARY):
        return type(f)(rename(f.arg, get))
    if isinstance(f, BINARY):
        return type(f)(rename(f.left, get), rename(f.right, get))
    return f


def desugar(f: Ltl) -> Ltl:
    """Rewrite into the core ``{Const(True), Atom, Not, And, Next, Until}``."""
    if isinstance(f, Const):
        return TRUE if f.value else Not(TRUE)
    if isinstance(f, Atom):
        return f
    if isinstance(f, Not):
        inner = desugar(f.arg)
        return inner.arg if isinstance(inner, Not) else Not(inner)
    if isinstance(f, And):
        return And(desugar(f.left), desugar(f.right))
    if isinstance(f, Or):
        return _neg(And(_neg(desugar(f.left)), _neg(desugar(f.right))))
    if isinstance(f, Implies):
        return _neg(And(desugar(f.left), _neg(desugar(f.right))))
    if isinstance(f, Iff):
        a, b = desugar(f.left), desugar(f.right)
        return And(_neg(And(a, _neg(b))), _neg(And(b, _neg(a))))
    if isinstance(f, Next):
        return Next(desugar(f.arg))
    if isinstance(f, Until):
        return Until(desugar(f.left), desugar(f.right))
    if isinstance(f, Eventually):
        return Until(TRUE, desugar(f.arg))
    if isinstance(f, Always):
        return _neg(Until(TRUE, _neg(desugar(f.arg))))
    if isinstance(f, WeakUntil):
        # a W b == !(!b U (!a /\ !b))
        a, b = desugar(f.left), desugar(f.right)
        return _neg(Until(_neg(b), And(_neg(a), _neg(b))))
    raise TypeError(f"not an LTL formula: {f!r}")


def _neg(f: Ltl) -> Ltl:
    return f.arg if isinstance(f, Not) else Not(f)


def nnf(f: Ltl, negate: bool = False) -> Ltl:
    """Negation normal form over literals, And, Or, X, U, W, F, G."""
    if isinstance(f, Const):
        return Const(f.value != negate)
    if isinstance(f, Atom):
        return Not(f) if negate else f
    if isinstance(f, Not):
        return nnf(f.arg, not negate)
    if isinstance(f, And):
        op = Or if negate else And
        return op(nnf(f.left, negate), nnf(f.right, negate))
    if isinstance(f, Or):
        op = And if negate else Or
        return op(nnf(f.left, negate), nnf(f.right, negate))
    if isinstance(f, Implies):
        return nnf(Or(Not(f.left), f.right), negate)
    if isinstance(f, Iff):
        if negate:
            return Or(And(nnf(f.left), nnf(f.right, True)), And(nnf(f.left, True), nnf(f.right)))
        return Or(And(nnf(f.left), nnf(f.right)), And(nnf(f.left, True), nnf(f.right, True)))
    if isinstance(f, Next):
        return Next(nnf(f.arg, negate))
    if isinstance(f, Eventually):
        return Always(nnf(f.arg, True)) if negate else Eventually(nnf(f.arg))
    if isinstance(f, Always):
        return Eventually(nnf(f.arg, True)) if negate else Always(nnf(f.arg))
    if isinstance(f, Until):
        if negate:
            # !(a U b) == (a /\ !b) W (!a /\ !b)
            nb = nnf(f.right, True)
            return WeakUntil(And(nnf(f.left), nb), And(nnf(f.left, True), nb))
        return Until(nnf(f.left), nnf(f.right))
    if isinstance(f, WeakUntil):
        if negate:
            # !(a W b) == (a /\ !b) U (!a /\ !b)
            nb = nnf(f.right, True)
            return Until(And(nnf(f.left), nb), And(nnf(f.left, True), nb))
        return WeakUntil(nnf(f.left), nnf(f.right))
    raise TypeError(f"not an LTL formula: {f!r}")


def is_syntactic_safety(f: Ltl) -> bool:
    """True iff the negation normal form avoids U and F."""
    return _safe(nnf(f))


def _safe(f: Ltl) -> bool:
    if isinstance(f, (Until, Eventually)):
        return False
    return all(_safe(c) for c in children(f))
