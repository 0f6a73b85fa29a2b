"""Recursive-descent parser for the PHL concrete syntax.

Grammar (``->`` at formula level, the signed bound and the leading minus of a
sum, and the ``true``/``false`` constants extend the core grammar)::

    phl   := quant* body
    quant := ("forall"|"exists") IDENT "."
    body  := disj ["->" body]
    disj  := conj ("\\/" conj)*
    conj  := unit ("/\\" unit)*
    unit  := "!" unit | "(" phl ")" | hyper | pred
    hyper := (("forall"|"exists") IDENT ":" IDENT ".")+ ltl
    pred  := sum ("<="|"<"|">="|">") ["-"] RATIONAL
    sum   := ["-"] term (("+"|"-") term)*
    term  := [RATIONAL "*"] "P" "(" ltl ")"

LTL binds ``! X F G`` tightest, then ``U W`` (right associative), ``/\\``,
``\\/``, ``->`` (right associative) and ``<->``.  A hyper body's LTL matrix
extends as far as it parses; a binary operator whose right operand is not
LTL is left to the enclosing formula.
"""

from __future__ import annotations

import re
from fractions import Fraction

from phlcheck.errors import PhlSyntaxError
from phlcheck.logic import ltl as L
from phlcheck.logic import phl as P

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<num>\d+(?:\.\d+)?(?:/\d+)?)
  | (?P<op><->|->|/\\|\\/|<=|>=|[<>()!.:@*+\-])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)

KEYWORDS = {"forall", "exists", "X", "F", "G", "U", "W", "P", "true", "false"}


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def tokenize(text: str) -> list[Token]:
    out = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise PhlSyntaxError(line, col, "a token", text[pos])
        kind = m.lastgroup
        tok = m.group()
        if kind != "ws":
            if kind == "ident" and tok in KEYWORDS:
                kind = "kw"
            out.append(Token(kind, tok, line, col))
        nl = tok.count("\n")
        if nl:
            line += nl
            col = len(tok) - tok.rfind("\n")
        else:
            col += len(tok)
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


def parse_rational(text: str) -> Fraction:
    if "/" in text:
        num, den = text.split("/")
        return Fraction(Fraction(num), Fraction(den))
    return Fraction(text)


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # token helpers
    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind in ("op", "kw") and t.text == text

    def fail(self, expected: str):
        t = self.peek()
        raise PhlSyntaxError(t.line, t.col, expected, t.text or "end of input")

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(repr(text))
        return self.advance()

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def ident(self) -> Token:
        t = self.peek()
        if t.kind != "ident":
            self.fail("identifier")
        return self.advance()

    # formula level
    def phl(self) -> P.Phl:
        t = self.peek()
        if self.at_sched_quant():
            kind = self.advance().text
            var = self.ident().text
            self.expect(".")
            return P.Quantified(kind, var, self.phl(), (t.line, t.col))
        return self.body()

    def at_sched_quant(self) -> bool:
        return (self.at("forall") or self.at("exists")) and self.peek(1).kind == "ident" and self.at(".", 2)

    def at_path_quant(self) -> bool:
        return (self.at("forall") or self.at("exists")) and self.peek(1).kind == "ident" and self.at(":", 2)

    def body(self) -> P.Phl:
        left = self.disj()
        if self.at("->"):
            self.advance()
            return P.PImplies(left, self.phl_operand())
        return left

    def phl_operand(self) -> P.Phl:
        # quantifiers may follow a connective; they extend to the right
        if self.at_sched_quant():
            return self.phl()
        return self.body()

    def disj(self) -> P.Phl:
        left = self.conj()
        while self.at("\\/"):
            self.advance()
            left = P.POr(left, self.conj())
        return left

    def conj(self) -> P.Phl:
        left = self.unit()
        while self.at("/\\"):
            self.advance()
            left = P.PAnd(left, self.unit())
        return left

    def unit(self) -> P.Phl:
        if self.at("!"):
            self.advance()
            return P.PNot(self.unit())
        if self.at("("):
            self.advance()
            inner = self.phl()
            self.expect(")")
            return inner
        if self.at_path_quant():
            return self.hyper()
        if self.at_sched_quant():
            return self.phl()
        return self.pred()

    def hyper(self) -> P.HyperBody:
        t = self.peek()
        prefix = []
        while self.at_path_quant():
            kind = self.advance().text
            path = self.ident().text
            self.expect(":")
            sched = self.ident().text
            self.expect(".")
            prefix.append(P.PathQuant(kind, path, sched))
        return P.HyperBody(tuple(prefix), self.ltl(), (t.line, t.col))

    def pred(self) -> P.ProbPredicate:
        t = self.peek()
        if not (self.at("P") or self.at("-") or self.peek().kind == "num"):
            self.fail("a quantifier, '!', '(' or a probability term")
        sign = 1
        if self.at("-"):
            self.advance()
            sign = -1
        terms = [self.term(sign)]
        while self.at("+") or self.at("-"):
            sign = 1 if self.advance().text == "+" else -1
            terms.append(self.term(sign))
        if not any(self.at(c) for c in P.COMPARATORS):
            self.fail("a comparator")
        cmp = self.advance().text
        neg = False
        if self.at("-"):
            self.advance()
            neg = True
        num = self.peek()
        if num.kind != "num":
            self.fail("a rational bound")
        self.advance()
        bound = parse_rational(num.text)
        return P.ProbPredicate(tuple(terms), cmp, -bound if neg else bound, (t.line, t.col))

    def term(self, sign: int) -> P.Term:
        coeff = Fraction(1)
        if self.peek().kind == "num":
            coeff = parse_rational(self.advance().text)
            self.expect("*")
        self.expect("P")
        self.expect("(")
        f = self.ltl()
        self.expect(")")
        return P.Term(sign * coeff, f)

    # LTL level
    def ltl(self) -> L.Ltl:
        return self.ltl_iff()

    def _try_rhs(self, parse):
        """Parse a right operand, or rewind and return None if it is not LTL."""
        save = self.i
        try:
            return parse()
        except PhlSyntaxError:
            self.i = save
            return None

    def _binary_loop(self, op, node, sub):
        left = sub()
        while self.at(op):
            save = self.i
            self.advance()
            right = self._try_rhs(sub)
            if right is None:
                self.i = save
                break
            left = node(left, right)
        return left

    def ltl_iff(self):
        return self._binary_loop("<->", L.Iff, self.ltl_implies)

    def ltl_implies(self):
        left = self.ltl_or()
        if self.at("->"):
            save = self.i
            self.advance()
            right = self._try_rhs(self.ltl_implies)
            if right is None:
                self.i = save
                return left
            return L.Implies(left, right)
        return left

    def ltl_or(self):
        return self._binary_loop("\\/", L.Or, self.ltl_and)

    def ltl_and(self):
        return self._binary_loop("/\\", L.And, self.ltl_until)

    def ltl_until(self):
        left = self.ltl_unary()
        for op, node in (("U", L.Until), ("W", L.WeakUntil)):
            if self.at(op):
                save = self.i
                self.advance()
                right = self._try_rhs(self.ltl_until)
                if right is None:
                    self.i = save
                    return left
                return node(left, right)
        return left

    def ltl_unary(self):
        for op, node in (("!", L.Not), ("X", L.Next), ("F", L.Eventually), ("G", L.Always)):
            if self.at(op):
                self.advance()
                return node(self.ltl_unary())
        return self.ltl_primary()

    def ltl_primary(self):
        if self.at("("):
            self.advance()
            f = self.ltl()
            self.expect(")")
            return f
        if self.at("true"):
            self.advance()
            return L.TRUE
        if self.at("false"):
            self.advance()
            return L.FALSE
        if self.peek().kind == "ident":
            name = self.advance().text
            self.expect("@")
            var = self.ident().text
            return L.Atom(name, var)
        self.fail("an LTL formula")


def parse_phl(text: str, check: bool = True) -> P.Phl:
    """Parse a closed, well-formed PHL formula."""
    p = Parser(text)
    f = p.phl()
    if p.peek().kind != "eof":
        p.fail("end of input")
    if check:
        P.check_closed(f)
    return f


def parse_ltl(text: str) -> L.Ltl:
    p = Parser(text)
    f = p.ltl()
    if p.peek().kind != "eof":
        p.fail("end of input")
    return f
