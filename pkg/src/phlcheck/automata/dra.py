"""Safra determinization of Büchi automata into Rabin automata.

A Safra tree is a nested tuple ``(name, label, marked, children)`` with
children ordered oldest first.  The empty tree (``None``) is the rejecting
sink, so the transition function is total.  For every name ``i`` the pair
``(B_i, G_i)`` has ``B_i`` = trees without node ``i`` and ``G_i`` = trees in
which node ``i`` is marked.
"""

from __future__ import annotations

import threading

from phlcheck.automata.nba import Nba, all_letters
from phlcheck.errors import StateBlowup

DEFAULT_TREE_CAP = 100_000


def _names(tree, out):
    if tree is None:
        return out
    out.add(tree[0])
    for c in tree[3]:
        _names(c, out)
    return out


def _unmark(t):
    return (t[0], t[1], False, tuple(_unmark(c) for c in t[3]))


def _spawn(t, acc, free):
    kids = tuple(_spawn(c, acc, free) for c in t[3])
    hit = t[1] & acc
    if hit:
        kids = kids + ((free.pop(0), hit, False, ()),)
    return (t[0], t[1], t[2], kids)


def _post(t, step):
    return (t[0], step(t[1]), t[2], tuple(_post(c, step) for c in t[3]))


def _hmerge(t, allowed):
    label = t[1] & allowed
    used = frozenset()
    kids = []
    for c in t[3]:
        c2 = _hmerge(c, label - used)
        used |= c2[1]
        kids.append(c2)
    return (t[0], label, t[2], tuple(kids))


def _prune(t):
    if not t[1]:
        return None
    kids = tuple(k for k in (_prune(c) for c in t[3]) if k is not None)
    return (t[0], t[1], t[2], kids)


def _vmerge(t):
    kids = tuple(_vmerge(c) for c in t[3])
    union = frozenset().union(*(c[1] for c in kids)) if kids else frozenset()
    if kids and union == t[1]:
        return (t[0], t[1], True, ())
    return (t[0], t[1], t[2], kids)


def _marked(tree, out):
    if tree is None:
        return out
    if tree[2]:
        out.add(tree[0])
    for c in tree[3]:
        _marked(c, out)
    return out


class Dra:
    """Deterministic Rabin automaton built lazily from an NBA by Safra's construction.

    States are integers; ``trees[q]`` is the Safra tree of state ``q``.
    Letters are sets of atom keys and are projected onto ``ap``.
    """

    def __init__(self, nba: Nba, cap: int = DEFAULT_TREE_CAP, source: str = ""):
        self.nba = nba
        self.ap = nba.ap
        self._apset = frozenset(nba.ap)
        self.cap = cap
        self.source = source
        self.num_names = max(2 * nba.num_states, 1)
        self.trees: list = []
        self._ids: dict = {}
        self._delta: dict = {}
        self._present: list = []
        self._marks: list = []
        self._lock = threading.Lock()
        init = frozenset(nba.initial)
        if init:
            # marks on the first state are irrelevant for acceptance
            t0 = (1, init, init <= nba.accepting, ())
        else:
            t0 = None
        self.initial = self._intern(t0)

    @property
    def num_states(self) -> int:
        return len(self.trees)

    @property
    def pair_names(self) -> range:
        return range(1, self.num_names + 1)

    def _intern(self, tree) -> int:
        q = self._ids.get(tree)
        if q is None:
            if len(self.trees) >= self.cap:
                what = f" for {self.source}" if self.source else ""
                raise StateBlowup(f"Safra construction{what} exceeded {self.cap} trees")
            q = len(self.trees)
            self._ids[tree] = q
            self.trees.append(tree)
            self._present.append(frozenset(_names(tree, set())))
            self._marks.append(frozenset(_marked(tree, set())))
        return q

    def _succ_tree(self, tree, letter):
        if tree is None:
            return None
        a = self.nba
        used = _names(tree, set())
        free = [i for i in range(1, self.num_names + 1) if i not in used]

        def step(label):
            out = set()
            for s in label:
                out.update(a.delta.get((s, letter), ()))
            return frozenset(out)

        t = _unmark(tree)
        t = _spawn(t, a.accepting, free)
        t = _post(t, step)
        t = _hmerge(t, t[1])
        t = _prune(t)
        if t is None:
            return None
        return _vmerge(t)

    def step(self, q: int, letter) -> int:
        letter = frozenset(letter) & self._apset
        key = (q, letter)
        r = self._delta.get(key)
        if r is None:
            with self._lock:
                r = self._delta.get(key)
                if r is None:
                    r = self._intern(self._succ_tree(self.trees[q], letter))
                    self._delta[key] = r
        return r

    def explore(self) -> "Dra":
        """Build every state reachable over the full alphabet."""
        letters = all_letters(self.ap)
        j = 0
        while j < len(self.trees):
            for a in letters:
                self.step(j, a)
            j += 1
        return self

    def in_bad(self, q: int, i: int) -> bool:
        return i not in self._present[q]

    def in_good(self, q: int, i: int) -> bool:
        return i in self._marks[q]

    def pairs(self) -> list:
        """Explicit ``(B_i, G_i)`` state sets over the states built so far.

        Names that are never marked give an empty good set, cannot accept,
        and are left out.
        """
        out = []
        for i in self.pair_names:
            good = frozenset(q for q in range(self.num_states) if self.in_good(q, i))
            if good:
                bad = frozenset(q for q in range(self.num_states) if self.in_bad(q, i))
                out.append((bad, good))
        return out

    def accepts_cycle(self, states) -> bool:
        """Rabin condition for a run whose infinitely visited states are ``states``."""
        states = list(states)
        for i in self.pair_names:
            if all(i in self._present[q] for q in states) and any(i in self._marks[q] for q in states):
                return True
        return False

    def accepts_lasso(self, stem, loop) -> bool:
        q = self.initial
        for a in stem:
            q = self.step(q, a)
        seen: dict = {}
        loop = [frozenset(a) for a in loop]
        k = 0
        while (q, k) not in seen:
            seen[(q, k)] = len(seen)
            q = self.step(q, loop[k])
            k = (k + 1) % len(loop)
        start = seen[(q, k)]
        cyc = [s for (s, _), idx in seen.items() if idx >= start]
        return self.accepts_cycle(cyc)


def nba_to_dra(a: Nba, cap: int = DEFAULT_TREE_CAP, source: str = "", explore: bool = True) -> Dra:
    d = Dra(a, cap=cap, source=source)
    return d.explore() if explore else d


class ExplicitDra:
    """A hand-written Rabin automaton, e.g. read from a text file.

    ``delta[(q, letter)]`` must be total over ``2^ap``.
    """

    def __init__(self, ap, num_states, initial, delta, pairs, source: str = ""):
        self.ap = tuple(ap)
        self._apset = frozenset(self.ap)
        self.num_states = num_states
        self.initial = initial
        self._delta = dict(delta)
        self._pairs = [(frozenset(b), frozenset(g)) for b, g in pairs]
        self.source = source

    @property
    def pair_names(self) -> range:
        return range(1, len(self._pairs) + 1)

    def step(self, q: int, letter) -> int:
        return self._delta[(q, frozenset(letter) & self._apset)]

    def explore(self) -> "ExplicitDra":
        return self

    def in_bad(self, q: int, i: int) -> bool:
        return q in self._pairs[i - 1][0]

    def in_good(self, q: int, i: int) -> bool:
        return q in self._pairs[i - 1][1]

    def pairs(self) -> list:
        return list(self._pairs)

    def accepts_cycle(self, states) -> bool:
        states = set(states)
        return any(not (states & b) and (states & g) for b, g in self._pairs)

    accepts_lasso = Dra.accepts_lasso
