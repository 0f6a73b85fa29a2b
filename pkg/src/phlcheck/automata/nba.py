"""LTL to nondeterministic Büchi automata by the elementary-set tableau.

An automaton state reads its own letter: a state ``B`` (an elementary subset
of the closure) is left only on the letter ``B ∩ AP``.  Generalized
acceptance (one set per until subformula) is removed by the counting
construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from phlcheck.errors import FormulaTooLarge
from phlcheck.graph import backward_reach, forward_reach, is_nontrivial, scc
from phlcheck.logic import ltl as L

DEFAULT_CLOSURE_CAP = 1 << 16


@dataclass(frozen=True, eq=False)
class Nba:
    """Büchi automaton over letters that are subsets of ``ap`` (atom keys).

    ``delta[(q, letter)]`` holds successor states; missing keys mean no move.
    """

    ap: tuple
    num_states: int
    initial: frozenset
    accepting: frozenset
    delta: dict

    def step(self, q: int, letter) -> frozenset:
        return self.delta.get((q, frozenset(letter) & self._apset), frozenset())

    @property
    def _apset(self) -> frozenset:
        return frozenset(self.ap)

    def letters(self) -> list:
        return all_letters(self.ap)

    def out_edges(self, q: int) -> list:
        return [(a, t) for (p, a), t in self.delta.items() if p == q]


def all_letters(ap) -> list:
    ap = tuple(ap)
    return [frozenset(x for x, bit in zip(ap, bits) if bit) for bits in product((False, True), repeat=len(ap))]


def _subformulas(f: L.Ltl, out: list, seen: set) -> None:
    for c in L.children(f):
        _subformulas(c, out, seen)
    if f not in seen:
        seen.add(f)
        out.append(f)


def ltl_to_nba(f: L.Ltl, closure_cap: int = DEFAULT_CLOSURE_CAP) -> Nba:
    core = L.desugar(f)
    subs: list = []
    _subformulas(core, subs, set())
    idx = {g: i for i, g in enumerate(subs)}
    free = [i for i, g in enumerate(subs) if isinstance(g, (L.Atom, L.Next, L.Until))]
    if (1 << len(free)) > closure_cap:
        raise FormulaTooLarge(
            f"closure of {f!r} needs {1 << len(free)} candidate sets (cap {closure_cap})")
    untils = [i for i, g in enumerate(subs) if isinstance(g, L.Until)]
    nexts = [i for i, g in enumerate(subs) if isinstance(g, L.Next)]
    atom_ix = [i for i, g in enumerate(subs) if isinstance(g, L.Atom)]
    ap = tuple(sorted({subs[i].key for i in atom_ix}))

    rows = []
    for bits in product((False, True), repeat=len(free)):
        v = [False] * len(subs)
        for i, b in zip(free, bits):
            v[i] = b
        ok = True
        for i, g in enumerate(subs):
            if isinstance(g, L.Const):
                v[i] = True
            elif isinstance(g, L.Not):
                v[i] = not v[idx[g.arg]]
            elif isinstance(g, L.And):
                v[i] = v[idx[g.left]] and v[idx[g.right]]
            elif isinstance(g, L.Until):
                a, b = v[idx[g.left]], v[idx[g.right]]
                if (b and not v[i]) or (v[i] and not b and not a):
                    ok = False
                    break
        if ok:
            rows.append(v)
    table = np.array(rows, dtype=bool).reshape(len(rows), len(subs))
    n = len(rows)
    root = idx[core]

    succ: list[list[int]] = []
    for s in range(n):
        cols, vals = [], []
        for i in nexts:
            cols.append(idx[subs[i].arg])
            vals.append(table[s, i])
        for i in untils:
            g = subs[i]
            if not table[s, idx[g.right]] and table[s, idx[g.left]]:
                cols.append(i)
                vals.append(table[s, i])
        if cols:
            mask = (table[:, cols] == np.array(vals)).all(axis=1)
            succ.append(np.nonzero(mask)[0].tolist())
        else:
            succ.append(list(range(n)))
    letter = [frozenset(subs[i].key for i in atom_ix if table[s, i]) for s in range(n)]
    inits = [s for s in range(n) if table[s, root]]
    fair = [
        {s for s in range(n) if not table[s, i] or table[s, idx[subs[i].right]]} for i in untils
    ]
    return _degeneralize(ap, n, letter, succ, inits, fair)


def _degeneralize(ap, n, letter, succ, inits, fair) -> Nba:
    k = max(1, len(fair))
    if not fair:
        fair = [set(range(n))]
    # product node (s, i) -> id, explored from the initial copies
    ids: dict = {}
    order: list = []

    def node(s, i):
        key = (s, i)
        if key not in ids:
            ids[key] = len(order)
            order.append(key)
        return ids[key]

    init = [node(s, 0) for s in inits]
    edges: list[list[int]] = []
    j = 0
    while j < len(order):
        s, i = order[j]
        nxt = (i + 1) % k if s in fair[i] else i
        edges.append([node(t, nxt) for t in succ[s]])
        j += 1
    acc = {ids[(s, 0)] for (s, i) in order if i == 0 and s in fair[0]}
    # keep only states that can reach an accepting cycle
    comps = scc(len(order), edges)
    good = set()
    for comp in comps:
        if is_nontrivial(comp, edges) and acc.intersection(comp):
            good.update(comp)
    live = backward_reach(edges, good) if good else set()
    live &= forward_reach(edges, [q for q in init])
    keep = sorted(live)
    remap = {q: r for r, q in enumerate(keep)}
    delta: dict = {}
    for q in keep:
        s, _ = order[q]
        targets = frozenset(remap[t] for t in edges[q] if t in remap)
        if targets:
            delta[(remap[q], letter[s])] = targets
    return Nba(
        ap=ap,
        num_states=len(keep),
        initial=frozenset(remap[q] for q in init if q in remap),
        accepting=frozenset(remap[q] for q in acc if q in remap),
        delta=delta,
    )


def run_prefix(a: Nba, states, word) -> frozenset:
    """States reachable from ``states`` after reading the finite ``word``."""
    cur = frozenset(states)
    for letter in word:
        letter = frozenset(letter)
        cur = frozenset(t for q in cur for t in a.step(q, letter))
    return cur


def accepts_from(a: Nba, states, loop) -> bool:
    """Does some run from ``states`` on ``loop^omega`` visit F infinitely often?"""
    loop = [frozenset(x) for x in loop]
    m = len(loop)
    start = [(q, 0) for q in sorted(states)]
    succ: dict = {}
    todo = list(start)
    seen = set(start)
    while todo:
        q, pos = todo.pop()
        out = [(t, (pos + 1) % m) for t in a.step(q, loop[pos])]
        succ[(q, pos)] = out
        for v in out:
            if v not in seen:
                seen.add(v)
                todo.append(v)
    for node in seen:
        if node[0] not in a.accepting:
            continue
        stack = list(succ[node])
        visited = set()
        while stack:
            v = stack.pop()
            if v == node:
                return True
            if v not in visited:
                visited.add(v)
                stack.extend(succ[v])
    return False


def nba_accepts_lasso(a: Nba, stem, loop) -> bool:
    """Membership of ``stem loop^omega``."""
    return accepts_from(a, run_prefix(a, a.initial, stem), loop)
