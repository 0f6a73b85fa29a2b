"""Success sets: states inside end components that satisfy a conjunction of Rabin conditions."""

from __future__ import annotations

import itertools

from phlcheck.analysis.mec import mec_decomposition
from phlcheck.composition import ProductMdp


def good_states(p: ProductMdp, selection: dict) -> frozenset:
    """Union of MECs avoiding every chosen bad set and meeting every chosen good set.

    ``selection`` maps automaton index ``i`` to the pair index ``j_i``.
    """
    avoid = set()
    for i, j in selection.items():
        avoid |= p.bad[i][j]
    allowed = set(range(p.num_states)) - avoid
    out = set()
    for ec in mec_decomposition(p.mdp, allowed):
        if all(ec.states & p.good[i][j] for i, j in selection.items()):
            out |= ec.states
    return frozenset(out)


def success_sets(p: ProductMdp, k: int | None = None) -> dict:
    """Map every nonempty ``I`` (a frozenset of operand indices) to ``U_I``."""
    k = p.k if k is None else k
    table = {}
    for r in range(1, k + 1):
        for combo in itertools.combinations(range(k), r):
            u = set()
            for picks in itertools.product(*(range(len(p.good[i])) for i in combo)):
                u |= good_states(p, dict(zip(combo, picks)))
            table[frozenset(combo)] = frozenset(u)
    return table


def floors(p: ProductMdp, table: dict, coeffs) -> list:
    """Largest ``sum_{i in I} c_i`` over the success sets containing each state."""
    out = [0.0] * p.num_states
    for I, states in table.items():
        w = float(sum(coeffs[i] for i in I))
        for s in states:
            if w > out[s]:
                out[s] = w
    return out
