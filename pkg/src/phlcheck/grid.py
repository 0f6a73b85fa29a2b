"""Grid arenas with several robots heading for a shared goal cell.

Robots live on an ``n x n`` grid and move jointly: a joint action picks one
move per robot among N, E, S, W and stay.  Robot ``i``'s move fails (the
robot stays put) with probability ``slip`` for robots 2..k and ``lead_slip``
for robot 1.  Robots may share cells.

Propositions:

* ``goal_i`` holds when robot ``i`` is on the goal cell (the center);
* ``move_i`` holds when robot ``i``'s Manhattan distance to the goal is odd.
  The parity flips on every successful step, so two runs agree on ``move_i``
  exactly when robot ``i`` moves in lockstep in both.

Each robot starts in the corner farthest from the goal that is not already
taken.  Per state, each robot's moves are ordered by distance to the goal
after the move (ties in N, E, S, W, stay order), so the first joint action
is the greedy one.
"""

from __future__ import annotations

import itertools

from phlcheck.errors import SizeCap
from phlcheck.mdp import Mdp

MOVES = {"N": (0, -1), "E": (1, 0), "S": (0, 1), "W": (-1, 0), "stay": (0, 0)}
COMPASS = ("N", "E", "S", "W", "stay")
DEFAULT_SLIP = 0.1


def _dist(p, goal):
    return abs(p[0] - goal[0]) + abs(p[1] - goal[1])


def grid_mdp(n: int, k: int = 2, slip: float = DEFAULT_SLIP, lead_slip: float = 0.0,
             cap: int = 1_000_000) -> Mdp:
    if n < 2:
        raise ValueError("grid size must be at least 2")
    if k < 1:
        raise ValueError("need at least one robot")
    cells = [(x, y) for y in range(n) for x in range(n)]
    if len(cells) ** k > cap:
        raise SizeCap(f"{len(cells)}^{k} joint states exceed the cap of {cap}")
    goal = ((n - 1) // 2, (n - 1) // 2)
    corners = [(n - 1, n - 1), (0, 0), (n - 1, 0), (0, n - 1)]
    corners = sorted(corners, key=lambda c: -_dist(c, goal))
    if k > len(corners):
        raise ValueError("at most four robots")
    start = tuple(corners[:k])

    def name(ps):
        return "_".join(f"{x}.{y}" for x, y in ps)

    joint = list(itertools.product(cells, repeat=k))
    index = {ps: i for i, ps in enumerate(joint)}
    slips = [lead_slip] + [slip] * (k - 1)
    actions: dict = {}
    rows = []
    for ps in joint:
        per_robot = []
        for p in ps:
            opts = []
            for mv in COMPASS:
                dx, dy = MOVES[mv]
                q = (p[0] + dx, p[1] + dy)
                if 0 <= q[0] < n and 0 <= q[1] < n:
                    opts.append((_dist(q, goal), COMPASS.index(mv), mv, q))
            opts.sort()
            per_robot.append([(mv, q) for _, _, mv, q in opts])
        row = []
        for combo in itertools.product(*per_robot):
            aname = ".".join(mv for mv, _ in combo)
            aid = actions.setdefault(aname, len(actions))
            outcomes = [((), 1.0)]
            for (mv, q), p, e in zip(combo, ps, slips):
                branch = [(q, 1.0)] if mv == "stay" or e == 0 else [(q, 1.0 - e), (p, e)]
                outcomes = [(t + (c,), pr * w) for t, pr in outcomes for c, w in branch]
            dist: dict = {}
            for t, pr in outcomes:
                j = index[t]
                dist[j] = dist.get(j, 0.0) + pr
            row.append((aid, sorted(dist.items())))
        rows.append(row)
    labels = []
    for ps in joint:
        lab = set()
        for i, p in enumerate(ps, 1):
            if p == goal:
                lab.add(f"goal{i}")
            if _dist(p, goal) % 2 == 1:
                lab.add(f"move{i}")
        labels.append(lab)
    ap = {f"goal{i}" for i in range(1, k + 1)} | {f"move{i}" for i in range(1, k + 1)}
    return Mdp([name(ps) for ps in joint], list(actions), rows, [(index[start], 1.0)], ap, labels)


def non_interference_formula(k: int = 2, epsilon="1/4") -> str:
    """Plan non-interference: equal move traces of robot 1 bound the change in its win probability."""
    others = " /\\ ".join(f"!goal{i}@{{s}}" for i in range(2, k + 1))
    win = "goal1@{s}" + (f" /\\ {others}" if others else "")
    w1 = win.replace("{s}", "s1")
    w2 = win.replace("{s}", "s2")
    return (
        "forall s1. forall s2.\n"
        "  (forall p1: s1. forall p2: s2. G (move1@p1 <-> move1@p2))\n"
        f"  -> P(F ({w1})) - P(F ({w2})) <= {epsilon}\n"
    )
