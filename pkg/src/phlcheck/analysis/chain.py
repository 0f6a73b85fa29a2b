"""Quantitative LTL model checking of Markov chains via Rabin products."""

from __future__ import annotations

import threading

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from phlcheck.automata.dra import DEFAULT_TREE_CAP, nba_to_dra
from phlcheck.automata.nba import DEFAULT_CLOSURE_CAP, ltl_to_nba
from phlcheck.graph import backward_reach, scc
from phlcheck.logic import ltl as L
from phlcheck.logic.printer import ltl_str
from phlcheck.mdp import MarkovChain


class AutomataCache:
    """Thread-safe memo of Rabin automata per LTL formula."""

    def __init__(self, closure_cap: int = DEFAULT_CLOSURE_CAP, tree_cap: int = DEFAULT_TREE_CAP):
        self.closure_cap = closure_cap
        self.tree_cap = tree_cap
        self._dra: dict = {}
        self._nba: dict = {}
        self._lock = threading.Lock()

    def nba(self, f: L.Ltl):
        with self._lock:
            a = self._nba.get(f)
            if a is None:
                a = self._nba[f] = ltl_to_nba(f, self.closure_cap)
            return a

    def dra(self, f: L.Ltl):
        a = self.nba(f)
        with self._lock:
            d = self._dra.get(f)
            if d is None:
                # explored lazily: products touch only the letters they need
                d = self._dra[f] = nba_to_dra(a, self.tree_cap, source=ltl_str(f), explore=False)
            return d

    def sizes(self) -> dict:
        return {ltl_str(f): {"nba": self._nba[f].num_states, "dra": d.num_states} for f, d in self._dra.items()}


def bottom_sccs(n: int, succ) -> list:
    out = []
    for comp in scc(n, succ):
        members = set(comp)
        if all(v in members for u in comp for v in succ[u]):
            out.append(comp)
    return out


def reach_probability(n: int, rows, init, targets) -> float:
    """Probability of reaching ``targets`` from ``init`` (``rows[u] = [(v, p)]``)."""
    targets = set(targets)
    if not targets:
        return 0.0
    succ = [[v for v, p in row if p > 0] for row in rows]
    can = backward_reach(succ, targets)
    unknown = sorted(can - targets)
    x = np.zeros(n)
    for t in targets:
        x[t] = 1.0
    if unknown:
        pos = {u: i for i, u in enumerate(unknown)}
        r, c, v = [], [], []
        b = np.zeros(len(unknown))
        for u in unknown:
            i = pos[u]
            r.append(i)
            c.append(i)
            v.append(1.0)
            for w, p in rows[u]:
                if w in targets:
                    b[i] += p
                elif w in pos:
                    r.append(i)
                    c.append(pos[w])
                    v.append(-p)
        a = sp.csc_matrix((v, (r, c)), shape=(len(unknown), len(unknown)))
        sol = np.atleast_1d(spsolve(a, b))
        for u in unknown:
            x[u] = sol[pos[u]]
    return float(sum(p * x[u] for u, p in init))


def chain_ltl_probability(c: MarkovChain, f: L.Ltl, cache: AutomataCache | None = None) -> float:
    """Probability that a run of ``c`` satisfies ``f`` (atoms matched by key)."""
    if isinstance(f, L.Const):
        return 1.0 if f.value else 0.0
    cache = cache or AutomataCache()
    d = cache.dra(f)
    ids: dict = {}
    nodes: list = []
    rows: list = []

    def node(key):
        i = ids.get(key)
        if i is None:
            i = ids[key] = len(nodes)
            nodes.append(key)
            rows.append(None)
        return i

    init = [(node((s, d.step(d.initial, c.label[s]))), p) for s, p in c.initial()]
    j = 0
    while j < len(nodes):
        s, q = nodes[j]
        rows[j] = [(node((t, d.step(q, c.label[t]))), p) for t, p in c.successors(s)]
        j += 1
    n = len(nodes)
    succ = [[v for v, p in row if p > 0] for row in rows]
    acc = set()
    for comp in bottom_sccs(n, succ):
        if d.accepts_cycle({nodes[u][1] for u in comp}):
            acc.update(comp)
    return min(1.0, max(0.0, reach_probability(n, rows, init, acc)))
