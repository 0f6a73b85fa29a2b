"""Explicit-state MDPs, Markov chains, finite-memory schedulers and induced chains.

States, actions and propositions are interned to dense integer ids.  Every
structure here is immutable after construction.

Anything exposing ``initial()``, ``enabled(s)``, ``successors(s, a)`` and
``labels(s)`` can be fed to :func:`induced_chain`; :class:`Mdp` and the lazy
self-composition in :mod:`phlcheck.composition` both do.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from phlcheck.errors import SchedulerActionDisabled

TOL = 1e-9
# rounding slack so that a sum exactly 1e-9 away from one counts as inside the band
_SLACK = 1e-15

Dist = tuple  # tuple[tuple[int, float], ...]


class Mdp:
    """An MDP ``(S, Act, P, init, AP, L)`` over integer ids.

    ``trans[s]`` lists ``(action, ((target, prob), ...))`` pairs in declaration
    order; that order is the enabled-action order used by scheduler
    enumeration.  The constructor does not validate; call
    :func:`validate_mdp`.
    """

    def __init__(
        self,
        states: Sequence[Hashable],
        actions: Sequence[Hashable],
        trans: Sequence[Sequence[tuple[int, Sequence[tuple[int, float]]]]],
        init: Sequence[tuple[int, float]],
        ap: Iterable[str],
        label: Sequence[Iterable[str]],
    ):
        self.states = tuple(states)
        self.actions = tuple(actions)
        self.trans = tuple(
            tuple((int(a), tuple((int(t), float(p)) for t, p in dist)) for a, dist in row)
            for row in trans
        )
        self.init = tuple((int(s), float(p)) for s, p in init)
        self.ap = tuple(sorted(set(ap)))
        self.label = tuple(frozenset(x) for x in label)
        self._index = {name: i for i, name in enumerate(self.states)}
        self._aindex = {name: i for i, name in enumerate(self.actions)}
        self._rows = [dict(row) for row in self.trans]

    @classmethod
    def from_names(
        cls,
        states: Sequence[Hashable],
        actions: Sequence[Hashable],
        trans: Mapping[tuple[Hashable, Hashable], Mapping[Hashable, float]],
        init: Mapping[Hashable, float],
        label: Mapping[Hashable, Iterable[str]] | None = None,
        ap: Iterable[str] | None = None,
    ) -> "Mdp":
        """Build from name-keyed maps; ``trans`` iteration order fixes enabled order."""
        si = {s: i for i, s in enumerate(states)}
        ai = {a: i for i, a in enumerate(actions)}
        rows: list[list] = [[] for _ in states]
        for (s, a), dist in trans.items():
            rows[si[s]].append((ai[a], [(si[t], p) for t, p in dist.items()]))
        label = label or {}
        lab = [frozenset(label.get(s, ())) for s in states]
        if ap is None:
            ap = set().union(*lab) if lab else set()
        return cls(states, actions, rows, [(si[s], p) for s, p in init.items()], ap, lab)

    @property
    def num_states(self) -> int:
        return len(self.states)

    def index(self, name: Hashable) -> int:
        return self._index[name]

    def action_index(self, name: Hashable) -> int:
        return self._aindex[name]

    def initial(self) -> tuple[tuple[int, float], ...]:
        return self.init

    def enabled(self, s: int) -> tuple[int, ...]:
        return tuple(a for a, _ in self.trans[s])

    def successors(self, s: int, a: int) -> tuple[tuple[int, float], ...]:
        try:
            return self._rows[s][a]
        except KeyError:
            raise SchedulerActionDisabled(
                f"action {self.actions[a]!r} is not enabled in state {self.states[s]!r}"
            ) from None

    def is_enabled(self, s: int, a: int) -> bool:
        return a in self._rows[s]

    def labels(self, s: int) -> frozenset[str]:
        return self.label[s]

    def num_transitions(self) -> int:
        return sum(len(d) for row in self.trans for _, d in row)

    def __repr__(self) -> str:
        return f"Mdp(states={self.num_states}, actions={len(self.actions)})"


def validate_mdp(m: Mdp, full_init: bool = True) -> list[str]:
    """List every violated invariant; empty means valid.

    ``full_init=False`` accepts an initial distribution with mass below one,
    which products pruned by a safety automaton legitimately have.
    """
    out = []
    n = m.num_states
    name = m.states
    for s in range(n):
        if not m.trans[s]:
            out.append(f"state {name[s]} has no enabled action")
        seen = set()
        for a, dist in m.trans[s]:
            if a in seen:
                out.append(f"row ({name[s]},{m.actions[a]}) declared twice")
            seen.add(a)
            total = 0.0
            for t, p in dist:
                if not 0 <= t < n:
                    out.append(f"row ({name[s]},{m.actions[a]}) targets unknown state {t}")
                if not (0.0 <= p <= 1.0):
                    out.append(f"row ({name[s]},{m.actions[a]}) has probability {p} outside [0,1]")
                total += p
            if abs(total - 1.0) > TOL + _SLACK:
                out.append(f"row ({name[s]},{m.actions[a]}) sums to {total:.12g}")
        extra = m.label[s] - set(m.ap)
        if extra:
            out.append(f"state {name[s]} carries labels {sorted(extra)} outside ap")
    total = sum(p for _, p in m.init)
    for s, p in m.init:
        if not 0 <= s < n:
            out.append(f"initial distribution names unknown state {s}")
        if p < 0:
            out.append(f"initial probability of {s} is negative")
    if full_init and abs(total - 1.0) > TOL + _SLACK:
        out.append(f"initial distribution sums to {total:.12g}")
    if not full_init and total > 1.0 + TOL:
        out.append(f"initial distribution sums to {total:.12g}")
    return out


@dataclass(frozen=True, eq=False)
class MarkovChain:
    """Finite Markov chain with a sparse row-stochastic matrix."""

    names: tuple
    matrix: sp.csr_matrix
    init: np.ndarray
    label: tuple

    @property
    def num_states(self) -> int:
        return len(self.names)

    def successors(self, i: int) -> list[tuple[int, float]]:
        lo, hi = self.matrix.indptr[i], self.matrix.indptr[i + 1]
        return list(zip(self.matrix.indices[lo:hi].tolist(), self.matrix.data[lo:hi].tolist()))

    def initial(self) -> list[tuple[int, float]]:
        nz = np.nonzero(self.init)[0]
        return [(int(i), float(self.init[i])) for i in nz]

    def relabel(self, fn) -> "MarkovChain":
        return MarkovChain(self.names, self.matrix, self.init, tuple(frozenset(fn(x)) for x in self.label))

    def with_suffix(self, var: str) -> "MarkovChain":
        """Index every proposition with ``@var``."""
        return self.relabel(lambda ls: {f"{a}@{var}" for a in ls})

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()


def chain_from_rows(names, rows, init, label) -> MarkovChain:
    """Assemble a chain from ``rows[i] = [(j, p), ...]`` with duplicate targets summed."""
    n = len(names)
    r, c, v = [], [], []
    for i, row in enumerate(rows):
        for j, p in row:
            r.append(i)
            c.append(j)
            v.append(p)
    mat = sp.csr_matrix((v, (r, c)), shape=(n, n))
    mat.sum_duplicates()
    vec = np.zeros(n)
    for i, p in init:
        vec[i] += p
    return MarkovChain(tuple(names), mat, vec, tuple(frozenset(x) for x in label))


class FiniteMemoryScheduler:
    """Scheduler ``(Q, update, q0, act)``.

    ``act[(q, s)]`` is an action id (deterministic) or a mapping action ->
    probability (randomized).  ``update[(q, s, a)]`` is the memory after
    choosing ``a`` in ``s``; entries not listed keep the memory unchanged, so
    the update is total.  The next action in ``s'`` is ``act(update(q,s,a), s')``.
    """

    def __init__(
        self,
        memory_size: int,
        act: Mapping[tuple[int, int], int | Mapping[int, float]],
        update: Mapping[tuple[int, int, int], int] | None = None,
        initial_memory: int = 0,
    ):
        self.memory_size = memory_size
        self.act = dict(act)
        self.update = dict(update or {})
        self.initial_memory = initial_memory

    @classmethod
    def memoryless(cls, choice: Mapping[int, int | Mapping[int, float]]) -> "FiniteMemoryScheduler":
        return cls(1, {(0, s): a for s, a in choice.items()})

    @property
    def deterministic(self) -> bool:
        return all(not isinstance(v, Mapping) for v in self.act.values())

    def choose(self, q: int, s: int) -> tuple[tuple[int, float], ...]:
        try:
            v = self.act[(q, s)]
        except KeyError:
            raise SchedulerActionDisabled(f"scheduler has no action for memory {q} in state {s}") from None
        if isinstance(v, Mapping):
            return tuple((a, float(p)) for a, p in v.items() if p > 0)
        return ((v, 1.0),)

    def next_memory(self, q: int, s: int, a: int) -> int:
        return self.update.get((q, s, a), q)

    def __repr__(self) -> str:
        return f"FiniteMemoryScheduler(memory={self.memory_size}, entries={len(self.act)})"


@dataclass(frozen=True)
class SchedulerTuple:
    members: tuple

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


class ComposedScheduler:
    """Parallel composition of member schedulers over tuple states and actions."""

    def __init__(self, members: Sequence):
        self.members = tuple(members)
        self.initial_memory = tuple(m.initial_memory for m in self.members)
        self.memory_size = int(np.prod([m.memory_size for m in self.members]))

    def choose(self, q: tuple, s: tuple) -> tuple:
        out = [((), 1.0)]
        for mem, qi, si in zip(self.members, q, s):
            out = [(acts + (a,), p * pa) for acts, p in out for a, pa in mem.choose(qi, si)]
        return tuple(out)

    def next_memory(self, q: tuple, s: tuple, a: tuple) -> tuple:
        return tuple(m.next_memory(qi, si, ai) for m, qi, si, ai in zip(self.members, q, s, a))


def compose_schedulers(tup: SchedulerTuple | Sequence) -> ComposedScheduler:
    members = tup.members if isinstance(tup, SchedulerTuple) else tuple(tup)
    return ComposedScheduler(members)


def induced_chain(m, sched) -> MarkovChain:
    """The chain over reachable ``(s, q)`` pairs induced by ``sched`` on ``m``.

    P((s,q),(s',q')) sums act(q,s)(a) * P(s,a,s') over actions with
    q' = update(q,s,a).
    """
    index: dict = {}
    names: list = []
    rows: list = []
    queue: deque = deque()

    def visit(node):
        i = index.get(node)
        if i is None:
            i = index[node] = len(names)
            names.append(node)
            rows.append(None)
            queue.append(node)
        return i

    q0 = sched.initial_memory
    init = [(visit((s, q0)), p) for s, p in m.initial() if p > 0]
    while queue:
        node = queue.popleft()
        s, q = node
        row = []
        for a, pa in sched.choose(q, s):
            q2 = sched.next_memory(q, s, a)
            for t, p in m.successors(s, a):
                if p > 0:
                    row.append((visit((t, q2)), pa * p))
        rows[index[node]] = row
    label = [m.labels(s) for s, _ in names]
    return chain_from_rows(names, rows, init, label)


def reachable_states(m, start: Iterable[int] | None = None) -> set:
    """States reachable in ``m`` under some action sequence."""
    todo = [s for s, p in m.initial() if p > 0] if start is None else list(start)
    seen = set(todo)
    while todo:
        s = todo.pop()
        for a in m.enabled(s):
            for t, p in m.successors(s, a):
                if p > 0 and t not in seen:
                    seen.add(t)
                    todo.append(t)
    return seen
