"""Self-composition of an MDP and its products with safety and Rabin automata."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from phlcheck.errors import EmptyProduct, SizeCap
from phlcheck.mdp import Mdp

DEFAULT_SIZE_CAP = 1_000_000


class SelfCompositionMdp:
    """The n-fold synchronous product of ``m`` with itself, built on demand.

    Component ``i`` is driven by scheduler variable ``sched_vars[i]``; flat
    labels index every proposition of component ``i`` with that name.  The
    initial distribution lives on the diagonal.
    """

    def __init__(self, m: Mdp, sched_vars, cap: int = DEFAULT_SIZE_CAP):
        self.base = m
        self.sched_vars = tuple(sched_vars)
        self.n = len(self.sched_vars)
        self.cap = cap
        if self.n < 1:
            raise ValueError("self-composition needs at least one component")
        if m.num_states ** self.n > cap:
            raise SizeCap(f"{m.num_states}^{self.n} tuple states exceed the cap of {cap}")
        self._lab: dict = {}

    @property
    def num_states(self) -> int:
        return self.base.num_states ** self.n

    def initial(self):
        return tuple(((s,) * self.n, p) for s, p in self.base.initial())

    def enabled(self, s: tuple):
        return tuple(itertools.product(*(self.base.enabled(si) for si in s)))

    def successors(self, s: tuple, a: tuple):
        out = [((), 1.0)]
        for si, ai in zip(s, a):
            dist = self.base.successors(si, ai)
            out = [(t + (u,), p * q) for t, p in out for u, q in dist]
        return tuple(out)

    def tuple_labels(self, s: tuple) -> tuple:
        return tuple(self.base.labels(si) for si in s)

    def labels(self, s: tuple) -> frozenset:
        r = self._lab.get(s)
        if r is None:
            r = frozenset(f"{a}@{v}" for v, si in zip(self.sched_vars, s) for a in self.base.labels(si))
            self._lab[s] = r
        return r

    def materialize(self, reachable_only: bool = False) -> Mdp:
        """An explicit :class:`Mdp` over all (or only reachable) tuple states."""
        if reachable_only:
            order, seen = [], set()
            todo = deque(s for s, _ in self.initial())
            seen.update(todo)
            while todo:
                s = todo.popleft()
                order.append(s)
                for a in self.enabled(s):
                    for t, p in self.successors(s, a):
                        if p > 0 and t not in seen:
                            seen.add(t)
                            todo.append(t)
            states = sorted(order)
        else:
            states = list(itertools.product(range(self.base.num_states), repeat=self.n))
        index = {s: i for i, s in enumerate(states)}
        actions: dict = {}
        rows = []
        for s in states:
            row = []
            for a in self.enabled(s):
                aid = actions.setdefault(a, len(actions))
                row.append((aid, [(index[t], p) for t, p in self.successors(s, a)]))
            rows.append(row)
        init = [(index[s], p) for s, p in self.initial()]
        ap = {f"{a}@{v}" for v in self.sched_vars for a in self.base.ap}
        return Mdp(states, list(actions), rows, init, ap, [self.labels(s) for s in states])


def self_compose(m: Mdp, n_or_vars, cap: int = DEFAULT_SIZE_CAP) -> SelfCompositionMdp:
    """``n_or_vars`` is a component count (names default to s1..sn) or the names."""
    if isinstance(n_or_vars, int):
        names = tuple(f"s{i + 1}" for i in range(n_or_vars))
    else:
        names = tuple(n_or_vars)
    return SelfCompositionMdp(m, names, cap)


@dataclass(eq=False)
class ProductMdp:
    """An explicit product MDP with back-maps and lifted Rabin pair sets.

    ``bad[i][j]`` and ``good[i][j]`` are state-id sets of pair ``j`` of
    automaton ``i``.  ``lost_initial_mass`` is the initial probability whose
    tuple states violate the safety body from the start or cannot avoid it.
    """

    mdp: Mdp
    base_state: tuple  # state id -> tuple state of the self-composition
    automaton_state: tuple  # state id -> (q, q1, ..., qk)
    bad: list = field(default_factory=list)
    good: list = field(default_factory=list)
    lost_initial_mass: float = 0.0
    explored: int = 0

    @property
    def num_states(self) -> int:
        return self.mdp.num_states

    @property
    def k(self) -> int:
        return len(self.bad)


def _interned_mdp(names, rows, init, labels, ap):
    actions: dict = {}
    trans = []
    for row in rows:
        r = []
        for a, dist in row:
            r.append((actions.setdefault(a, len(actions)), dist))
        trans.append(r)
    return Mdp(names, list(actions), trans, init, ap, labels)


def product_with_safety(mc: SelfCompositionMdp, dfa, cap: int = DEFAULT_SIZE_CAP) -> ProductMdp:
    """Product with a safety automaton, pruned until every action keeps full mass.

    Raises :class:`EmptyProduct` when no initial state survives.
    """
    ids: dict = {}
    nodes: list = []
    rows: list = []  # per node: list of (action, [(target id, p)], lost)

    def node(key):
        i = ids.get(key)
        if i is None:
            if len(nodes) >= cap:
                raise SizeCap(f"safety product exceeded {cap} states")
            i = ids[key] = len(nodes)
            nodes.append(key)
            rows.append(None)
        return i

    def letter(s):
        return dfa.letter_of(mc.tuple_labels(s))

    init = []
    lost = 0.0
    for s, p in mc.initial():
        q = dfa.step(dfa.initial, letter(s))
        if q is None:
            lost += p
        else:
            init.append((node((s, q)), p))
    j = 0
    while j < len(nodes):
        s, q = nodes[j]
        row = []
        for a in mc.enabled(s):
            dist, dead = [], False
            for t, p in mc.successors(s, a):
                if p <= 0:
                    continue
                q2 = dfa.step(q, letter(t))
                if q2 is None:
                    dead = True
                    break
                dist.append((node((t, q2)), p))
            row.append((a, dist, dead))
        rows[j] = row
        j += 1
    explored = len(nodes)

    # prune: drop actions that lose mass, then states without actions, to a fixpoint
    alive_actions = [[not dead for _, _, dead in row] for row in rows]
    count = [sum(flags) for flags in alive_actions]
    preds: list = [[] for _ in nodes]
    for u, row in enumerate(rows):
        for k, (_, dist, dead) in enumerate(row):
            if not dead:
                for t, _ in dist:
                    preds[t].append((u, k))
    removed = [False] * len(nodes)
    work = deque(u for u in range(len(nodes)) if count[u] == 0)
    for u in work:
        removed[u] = True
    while work:
        v = work.popleft()
        for u, k in preds[v]:
            if alive_actions[u][k]:
                alive_actions[u][k] = False
                count[u] -= 1
                if count[u] == 0 and not removed[u]:
                    removed[u] = True
                    work.append(u)
    surviving = [(i, p) for i, p in init if not removed[i]]
    lost += sum(p for i, p in init if removed[i])
    if not surviving or sum(p for _, p in surviving) <= 0:
        raise EmptyProduct("no initial tuple state satisfies the hyper-safety body")

    # trim to states reachable from surviving initial states
    keep = set(i for i, _ in surviving)
    todo = list(keep)
    while todo:
        u = todo.pop()
        for k, (_, dist, _) in enumerate(rows[u]):
            if alive_actions[u][k]:
                for t, _ in dist:
                    if t not in keep:
                        keep.add(t)
                        todo.append(t)
    order = sorted(keep)
    remap = {u: i for i, u in enumerate(order)}
    out_rows = []
    for u in order:
        out_rows.append([
            (a, [(remap[t], p) for t, p in dist])
            for k, (a, dist, _) in enumerate(rows[u]) if alive_actions[u][k]
        ])
    names = [nodes[u] for u in order]
    labels = [mc.labels(s) for s, _ in names]
    ap = {f"{a}@{v}" for v in mc.sched_vars for a in mc.base.ap}
    mdp = _interned_mdp(names, out_rows, [(remap[i], p) for i, p in surviving], labels, ap)
    return ProductMdp(
        mdp=mdp,
        base_state=tuple(s for s, _ in names),
        automaton_state=tuple((q,) for _, q in names),
        lost_initial_mass=lost,
        explored=explored,
    )


def trivial_product(mc: SelfCompositionMdp, cap: int = DEFAULT_SIZE_CAP) -> ProductMdp:
    """Reachable part of the self-composition, as a product with a one-state total automaton."""
    class _Total:
        initial = 0

        @staticmethod
        def step(q, letter):
            return 0

        @staticmethod
        def letter_of(labels):
            return frozenset()

    return product_with_safety(mc, _Total(), cap)


def product_with_rabin(p: ProductMdp, automata, cap: int = DEFAULT_SIZE_CAP) -> ProductMdp:
    """Extend ``p`` with one Rabin automaton per operand; lift the pairs.

    Automaton ``i`` moves on the flat label of the state being entered, and
    its first move reads the initial state.  Pairs whose good set is never
    reached are dropped since they can never be satisfied.
    """
    m = p.mdp
    k = len(automata)
    if k == 0:
        return p
    ids: dict = {}
    nodes: list = []
    rows: list = []

    def node(key):
        i = ids.get(key)
        if i is None:
            if len(nodes) >= cap:
                raise SizeCap(f"Rabin product exceeded {cap} states")
            i = ids[key] = len(nodes)
            nodes.append(key)
            rows.append(None)
        return i

    def move(qs, s):
        lab = m.labels(s)
        return tuple(d.step(q, lab) for d, q in zip(automata, qs))

    q0 = tuple(d.initial for d in automata)
    init = [(node((s, move(q0, s))), pr) for s, pr in m.initial()]
    j = 0
    while j < len(nodes):
        s, qs = nodes[j]
        row = []
        for a in m.enabled(s):
            row.append((m.actions[a], [(node((t, move(qs, t))), pr) for t, pr in m.successors(s, a)]))
        rows[j] = row
        j += 1
    names = [(m.states[s], qs) for s, qs in nodes]
    labels = [m.labels(s) for s, _ in nodes]
    mdp = _interned_mdp(names, rows, init, labels, m.ap)
    bad, good = [], []
    for i, d in enumerate(automata):
        bi, gi = [], []
        for name in d.pair_names:
            g = frozenset(u for u, (_, qs) in enumerate(nodes) if d.in_good(qs[i], name))
            if not g:
                continue
            gi.append(g)
            bi.append(frozenset(u for u, (_, qs) in enumerate(nodes) if d.in_bad(qs[i], name)))
        bad.append(bi)
        good.append(gi)
    return ProductMdp(
        mdp=mdp,
        base_state=tuple(p.base_state[s] for s, _ in nodes),
        automaton_state=tuple(p.automaton_state[s] + qs for s, qs in nodes),
        bad=bad,
        good=good,
        lost_initial_mass=p.lost_initial_mass,
        explored=len(nodes),
    )
