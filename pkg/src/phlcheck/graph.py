"""Small directed-graph helpers shared by automata and analysis code."""

from __future__ import annotations

from collections import deque
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components


def scc(n: int, succ: Sequence[Iterable[int]]) -> list[list[int]]:
    """Strongly connected components, each sorted, ordered by smallest member."""
    if n == 0:
        return []
    rows, cols = [], []
    for u, vs in enumerate(succ):
        for v in vs:
            rows.append(u)
            cols.append(v)
    g = sp.csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    _, labels = connected_components(g, directed=True, connection="strong")
    groups: dict[int, list[int]] = {}
    for u in range(n):
        groups.setdefault(int(labels[u]), []).append(u)
    return sorted(groups.values(), key=lambda c: c[0])


def is_nontrivial(comp: Sequence[int], succ: Sequence[Iterable[int]]) -> bool:
    """A component carries a cycle: more than one node or a self loop."""
    if len(comp) > 1:
        return True
    u = comp[0]
    return u in set(succ[u])


def forward_reach(succ: Sequence[Iterable[int]], start: Iterable[int]) -> set[int]:
    seen = set(start)
    todo = deque(seen)
    while todo:
        u = todo.popleft()
        for v in succ[u]:
            if v not in seen:
                seen.add(v)
                todo.append(v)
    return seen


def backward_reach(succ: Sequence[Iterable[int]], targets: Iterable[int]) -> set[int]:
    pred: list[list[int]] = [[] for _ in succ]
    for u, vs in enumerate(succ):
        for v in vs:
            pred[v].append(u)
    return forward_reach(pred, targets)
