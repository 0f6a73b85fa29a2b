"""Maximal expected floor reward: the least solution of x >= floor, x >= P x."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from phlcheck.analysis.success import floors
from phlcheck.composition import ProductMdp
from phlcheck.errors import NonConvergence
from phlcheck.mdp import Mdp

DEFAULT_MAX_ITER = 1_000_000
RESIDUAL = 1e-9
STOP = -1


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    """``policy[s]`` is an action id, or ``STOP`` where the floor is collected."""

    values: np.ndarray
    c_star: float
    policy: tuple
    iterations: int
    floors: np.ndarray


def _sa_matrix(m: Mdp):
    rows, cols, vals = [], [], []
    owner, act = [], []
    r = 0
    for s in range(m.num_states):
        for a, dist in m.trans[s]:
            for t, p in dist:
                rows.append(r)
                cols.append(t)
                vals.append(p)
            owner.append(s)
            act.append(a)
            r += 1
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(r, m.num_states))
    return mat, np.array(owner, dtype=np.int64), np.array(act, dtype=np.int64)


def value_iteration(m: Mdp, floor, max_iter: int = DEFAULT_MAX_ITER, on_iterate=None):
    """Iterate ``x <- max(floor, max_a P x)`` from zero; returns ``(x, iterations)``."""
    floor = np.asarray(floor, dtype=float)
    n = m.num_states
    mat, owner, _ = _sa_matrix(m)
    starts = np.searchsorted(owner, np.arange(n)) if len(owner) else np.zeros(n, dtype=np.int64)
    has = np.bincount(owner, minlength=n) > 0 if len(owner) else np.zeros(n, dtype=bool)
    x = np.zeros(n)
    for it in range(1, max_iter + 1):
        if len(owner):
            q = mat @ x
            best = np.full(n, 0.0)
            red = np.maximum.reduceat(q, starts[has]) if has.any() else np.array([])
            best[has] = red
        else:
            best = np.zeros(n)
        nxt = np.maximum(floor, best)
        if on_iterate is not None:
            on_iterate(it, x, nxt)
        res = float(np.max(np.abs(nxt - x))) if n else 0.0
        x = nxt
        if res < RESIDUAL:
            return x, it
    raise NonConvergence(f"value iteration did not reach residual {RESIDUAL} in {max_iter} iterations")


def extract_policy(m: Mdp, floor, x, eps: float = 1e-7) -> tuple:
    """Stop where the floor is optimal; elsewhere pick near-optimal actions that approach a stop."""
    n = m.num_states
    floor = np.asarray(floor, dtype=float)
    stop = [floor[s] > 0 and floor[s] >= x[s] - eps for s in range(n)]
    opt = {}
    for s in range(n):
        opt[s] = [a for a, dist in m.trans[s] if sum(p * x[t] for t, p in dist) >= x[s] - eps]
    policy = [None] * n
    todo = deque()
    for s in range(n):
        if stop[s]:
            policy[s] = STOP
            todo.append(s)
    preds: dict = {}
    for s in range(n):
        for a in opt[s]:
            for t, p in m.successors(s, a):
                if p > 0:
                    preds.setdefault(t, []).append((s, a))
    while todo:
        t = todo.popleft()
        for s, a in sorted(preds.get(t, ())):
            if policy[s] is None:
                policy[s] = a
                todo.append(s)
    for s in range(n):
        if policy[s] is None:
            policy[s] = m.trans[s][0][0] if m.trans[s] else STOP
    return tuple(policy)


def evaluate_policy(m: Mdp, floor, policy) -> np.ndarray:
    """Expected collected floor under a memoryless stopping policy."""
    n = m.num_states
    floor = np.asarray(floor, dtype=float)
    x = np.zeros(n)
    stops = [s for s in range(n) if policy[s] == STOP]
    for s in stops:
        x[s] = floor[s]
    # states that reach a stop with positive probability
    rev: dict = {}
    for s in range(n):
        if policy[s] != STOP:
            for t, p in m.successors(s, policy[s]):
                if p > 0:
                    rev.setdefault(t, []).append(s)
    can = set(stops)
    todo = list(stops)
    while todo:
        t = todo.pop()
        for s in rev.get(t, ()):
            if s not in can:
                can.add(s)
                todo.append(s)
    unknown = sorted(s for s in can if policy[s] != STOP)
    if not unknown:
        return x
    pos = {s: i for i, s in enumerate(unknown)}
    rows, cols, vals = [], [], []
    b = np.zeros(len(unknown))
    for s in unknown:
        i = pos[s]
        rows.append(i)
        cols.append(i)
        vals.append(1.0)
        for t, p in m.successors(s, policy[s]):
            if t in pos:
                rows.append(i)
                cols.append(pos[t])
                vals.append(-p)
            elif policy[t] == STOP:
                b[i] += p * floor[t]
    a = sp.csc_matrix((vals, (rows, cols)), shape=(len(unknown), len(unknown)))
    sol = spsolve(a, b)
    for s in unknown:
        x[s] = float(np.atleast_1d(sol)[pos[s]])
    return x


def solve_optimal_value(p: ProductMdp | Mdp, table=None, coeffs=None, floor=None,
                        max_iter: int = DEFAULT_MAX_ITER) -> OptimizationResult:
    """``c*`` as the maximal expected floor reached from the initial distribution.

    Pass either ``table`` and ``coeffs`` (success sets and their weights) or an
    explicit ``floor`` vector.
    """
    m = p.mdp if isinstance(p, ProductMdp) else p
    if floor is None:
        floor = floors(p, table, coeffs)
    floor = np.asarray(floor, dtype=float)
    x, iters = value_iteration(m, floor, max_iter)
    policy = extract_policy(m, floor, x)
    xp = evaluate_policy(m, floor, policy)
    # take the policy's value when it solves the constraints; it is attained exactly
    if _feasible(m, floor, xp, 1e-7) and np.all(xp >= x - 1e-7):
        x = np.maximum(x, xp)
    init = m.initial()
    c = float(sum(pr * x[s] for s, pr in init))
    return OptimizationResult(values=x, c_star=c, policy=policy, iterations=iters, floors=floor)


def _feasible(m: Mdp, floor, x, tol: float) -> bool:
    if np.any(x < floor - tol):
        return False
    for s in range(m.num_states):
        for _, dist in m.trans[s]:
            if sum(pr * x[t] for t, pr in dist) > x[s] + tol:
                return False
    return True
