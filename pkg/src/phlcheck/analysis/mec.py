"""Maximal end components by iterative SCC refinement."""

from __future__ import annotations

from dataclasses import dataclass

from phlcheck.graph import scc
from phlcheck.mdp import Mdp


@dataclass(frozen=True)
class EndComponent:
    states: frozenset
    actions: dict  # state -> frozenset of action ids


def mec_decomposition(m: Mdp, allowed=None) -> list[EndComponent]:
    """MECs of ``m`` restricted to the state set ``allowed`` (all states if None).

    Results are ordered by smallest member state.
    """
    n = m.num_states
    alive = set(range(n)) if allowed is None else set(allowed)
    acts = {s: {a for a in m.enabled(s)} for s in alive}
    while True:
        # drop actions that may leave the current state set, then empty states
        changed = True
        while changed:
            changed = False
            for s in sorted(alive):
                keep = {a for a in acts[s] if all(t in alive for t, p in m.successors(s, a) if p > 0)}
                if keep != acts[s]:
                    acts[s] = keep
                    changed = True
                if not keep:
                    alive.discard(s)
                    changed = True
        order = sorted(alive)
        pos = {s: i for i, s in enumerate(order)}
        succ = [
            sorted({pos[t] for a in acts[s] for t, p in m.successors(s, a) if p > 0})
            for s in order
        ]
        comp_of = {}
        comps = scc(len(order), succ)
        for ci, comp in enumerate(comps):
            for u in comp:
                comp_of[order[u]] = ci
        split = False
        for s in order:
            keep = {
                a for a in acts[s]
                if all(comp_of.get(t) == comp_of[s] for t, p in m.successors(s, a) if p > 0)
            }
            if keep != acts[s]:
                acts[s] = keep
                split = True
        if not split:
            out = []
            for comp in comps:
                states = frozenset(order[u] for u in comp)
                if all(acts[s] for s in states):
                    out.append(EndComponent(states, {s: frozenset(acts[s]) for s in sorted(states)}))
            return sorted(out, key=lambda e: min(e.states))
