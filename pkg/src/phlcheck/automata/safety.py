"""Deterministic safety automata for the matrix of an all-universal hyper body.

States are sets of obligations in disjunctive normal form, obtained by
formula progression on the negation normal form.  After the full state
space is explored, states with no infinite continuation are dropped, so a
transition is undefined exactly when the word read so far is a bad prefix.
"""

from __future__ import annotations

from dataclasses import dataclass

from phlcheck.automata.nba import all_letters
from phlcheck.errors import AlphabetMismatch, NotSafety, StateBlowup
from phlcheck.logic import ltl as L
from phlcheck.logic.phl import HyperBody

DEFAULT_STATE_CAP = 100_000

_TRUE_DNF = frozenset({frozenset()})
_FALSE_DNF = frozenset()


def _and(x: frozenset, y: frozenset) -> frozenset:
    return _minimize(frozenset(a | b for a in x for b in y))


def _minimize(dnf: frozenset) -> frozenset:
    """Drop clauses subsumed by a smaller clause."""
    clauses = sorted(dnf, key=len)
    keep: list = []
    for c in clauses:
        if not any(k <= c for k in keep):
            keep.append(c)
    return frozenset(keep)


def _lit(value: bool) -> frozenset:
    return _TRUE_DNF if value else _FALSE_DNF


def progress(f: L.Ltl, letter: frozenset) -> frozenset:
    """Obligations for the next position after reading ``letter``."""
    if isinstance(f, L.Const):
        return _lit(f.value)
    if isinstance(f, L.Atom):
        return _lit(f.key in letter)
    if isinstance(f, L.Not):
        return _lit(f.arg.key not in letter)
    if isinstance(f, L.And):
        return _and(progress(f.left, letter), progress(f.right, letter))
    if isinstance(f, L.Or):
        return _minimize(progress(f.left, letter) | progress(f.right, letter))
    if isinstance(f, L.Next):
        g = f.arg
        if isinstance(g, L.Const):
            return _lit(g.value)
        return frozenset({frozenset({g})})
    if isinstance(f, L.Always):
        return _and(progress(f.arg, letter), frozenset({frozenset({f})}))
    if isinstance(f, L.WeakUntil):
        stay = _and(progress(f.left, letter), frozenset({frozenset({f})}))
        return _minimize(progress(f.right, letter) | stay)
    raise NotSafety(f"operator {type(f).__name__} is not allowed in a safety matrix")


def _step(state: frozenset, letter: frozenset) -> frozenset:
    out: set = set()
    for clause in state:
        acc = _TRUE_DNF
        for g in sorted(clause, key=repr):
            acc = _and(acc, progress(g, letter))
            if not acc:
                break
        out |= acc
    return _minimize(frozenset(out))


@dataclass(frozen=True, eq=False)
class SafetyDfa:
    """Partial deterministic automaton over sets of path-indexed atom keys.

    ``components[i]`` is the path variable reading component ``i`` of a
    tuple state (None when no path variable is bound to it).
    """

    ap: tuple
    num_states: int
    initial: int
    delta: dict  # (q, letter) -> q', only defined transitions
    components: tuple
    obligations: tuple

    def step(self, q: int, letter) -> int | None:
        return self.delta.get((q, frozenset(letter) & frozenset(self.ap)))

    def letter_of(self, labels) -> frozenset:
        """Letter read on a tuple state whose component labels are ``labels``."""
        out = set()
        for path, lab in zip(self.components, labels):
            if path is None:
                continue
            for a in lab:
                key = f"{a}@{path}"
                if key in self._apset:
                    out.add(key)
        return frozenset(out)

    @property
    def _apset(self) -> frozenset:
        return frozenset(self.ap)

    def run(self, word) -> int | None:
        q = self.initial
        for a in word:
            q = self.step(q, a)
            if q is None:
                return None
        return q

    @property
    def is_total(self) -> bool:
        return len(self.delta) == self.num_states * (1 << len(self.ap))


def build_safety_dfa(matrix: L.Ltl, components: tuple = (), cap: int = DEFAULT_STATE_CAP) -> SafetyDfa:
    if not L.is_syntactic_safety(matrix):
        raise NotSafety(f"matrix is not a syntactic safety formula: {matrix!r}")
    f = L.nnf(matrix)
    ap = tuple(sorted(L.atom_keys(f)))
    letters = all_letters(ap)
    init = _lit(f.value) if isinstance(f, L.Const) else frozenset({frozenset({f})})
    ids = {init: 0}
    order = [init]
    raw: dict = {}
    j = 0
    while j < len(order):
        s = order[j]
        for a in letters:
            t = _step(s, a)
            if not t:
                continue
            if t not in ids:
                if len(order) >= cap:
                    raise StateBlowup(f"safety automaton exceeded {cap} states")
                ids[t] = len(order)
                order.append(t)
            raw[(j, a)] = ids[t]
        j += 1
    # greatest fixpoint: live states have a transition into a live state
    live = set(range(len(order)))
    while True:
        nxt = {q for q in live if any(raw.get((q, a)) in live for a in letters)}
        if nxt == live:
            break
        live = nxt
    delta = {(q, a): t for (q, a), t in raw.items() if q in live and t in live}
    if 0 not in live:
        delta = {}
    # renumber so live states come first in discovery order
    keep = sorted(live | {0})
    remap = {q: i for i, q in enumerate(keep)}
    delta = {(remap[q], a): remap[t] for (q, a), t in delta.items()}
    return SafetyDfa(
        ap=ap,
        num_states=len(keep),
        initial=remap[0],
        delta=delta,
        components=tuple(components),
        obligations=tuple(order[q] for q in keep),
    )


def safety_dfa(body: HyperBody, sched_vars, cap: int = DEFAULT_STATE_CAP) -> SafetyDfa:
    """Safety automaton reading tuple states of the self-composition over ``sched_vars``."""
    sched_vars = tuple(sched_vars)
    if not body.universal:
        raise NotSafety("hyper body has existential path quantifiers")
    if len(body.prefix) > len(sched_vars):
        raise AlphabetMismatch(
            f"{len(body.prefix)} path variables but only {len(sched_vars)} scheduler variables")
    components: list = [None] * len(sched_vars)
    for q in body.prefix:
        if q.sched not in sched_vars:
            raise AlphabetMismatch(f"path variable {q.path} binds unknown scheduler {q.sched!r}")
        i = sched_vars.index(q.sched)
        if components[i] is not None:
            raise AlphabetMismatch(f"scheduler {q.sched!r} carries more than one path variable")
        components[i] = q.path
    return build_safety_dfa(body.matrix, tuple(components), cap)
