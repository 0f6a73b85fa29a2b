"""Checking an all-universal hyper body against the chains induced by a scheduler tuple."""

from __future__ import annotations

import itertools

from phlcheck.analysis.chain import AutomataCache
from phlcheck.errors import ConfigError
from phlcheck.graph import is_nontrivial, scc
from phlcheck.logic import ltl as L
from phlcheck.logic.phl import HyperBody
from phlcheck.mdp import induced_chain


def check_hyper_body_on_chains(chains: dict, body: HyperBody, cache: AutomataCache | None = None) -> bool:
    """True iff every assignment of chain paths to the path variables satisfies the matrix.

    ``chains`` maps scheduler variables to induced chains with plain labels.
    Path variables bound to the same scheduler start in the same initial state.
    The check searches the graph product of the chain copies with a Büchi
    automaton for the negated matrix for an accepting lasso.
    """
    if not body.universal:
        raise ConfigError("hyper bodies with existential path quantifiers are not supported here")
    if isinstance(body.matrix, L.Const):
        return body.matrix.value
    cache = cache or AutomataCache()
    nba = cache.nba(L.Not(body.matrix))
    paths = [(q.path, chains[q.sched]) for q in body.prefix]
    scheds = list(dict.fromkeys(q.sched for q in body.prefix))
    slot = {s: i for i, s in enumerate(scheds)}
    owner = [slot[q.sched] for q in body.prefix]
    keys = []
    apset = frozenset(nba.ap)
    for path, ch in paths:
        keys.append([frozenset(f"{a}@{path}" for a in lab) & apset for lab in ch.label])

    def letter(cs):
        out = frozenset()
        for i, c in enumerate(cs):
            out |= keys[i][c]
        return out

    succ_cache = [dict() for _ in paths]

    def succs(i, c):
        r = succ_cache[i].get(c)
        if r is None:
            r = succ_cache[i][c] = [t for t, p in paths[i][1].successors(c) if p > 0]
        return r

    ids: dict = {}
    nodes: list = []
    edges: list = []

    def node(key):
        i = ids.get(key)
        if i is None:
            i = ids[key] = len(nodes)
            nodes.append(key)
            edges.append(None)
        return i

    starts = [[s for s, p in chains[s_].initial() if p > 0] for s_ in scheds]
    for combo in itertools.product(*starts):
        cs = tuple(combo[owner[i]] for i in range(len(paths)))
        for q in sorted(nba.initial):
            node((cs, q))
    j = 0
    while j < len(nodes):
        cs, q = nodes[j]
        nq = sorted(nba.step(q, letter(cs)))
        out = []
        if nq:
            for nxt in itertools.product(*(succs(i, c) for i, c in enumerate(cs))):
                for q2 in nq:
                    out.append(node((nxt, q2)))
        edges[j] = out
        j += 1
    for comp in scc(len(nodes), edges):
        if is_nontrivial(comp, edges) and any(nodes[u][1] in nba.accepting for u in comp):
            return False
    return True


def check_hyper_body_on_tuple(m, members, body: HyperBody, sched_vars, cache: AutomataCache | None = None) -> bool:
    """``members[i]`` is the scheduler bound to ``sched_vars[i]``."""
    chains = {v: induced_chain(m, s) for v, s in zip(sched_vars, members)}
    return check_hyper_body_on_chains(chains, body, cache)

