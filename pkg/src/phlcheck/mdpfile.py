"""Reading and writing the explicit MDP text format.

::

    mdp
    states: s0 s1 s2
    actions: a1 a2
    init: s0:1
    label s1: a
    trans s0 a1: s1:1
    trans s0 a2: s2:1

The order of ``trans`` lines for a state fixes its enabled-action order.
Lines starting with ``#`` are comments.
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from phlcheck.errors import InvalidMdp, MdpFormatError
from phlcheck.mdp import Mdp, validate_mdp


def _prob(text: str, lineno: int) -> float:
    try:
        if "/" in text:
            return float(Fraction(text))
        return float(text)
    except (ValueError, ZeroDivisionError):
        raise MdpFormatError(lineno, f"bad probability {text!r}") from None


def _dist(items, lineno: int, known: dict) -> list:
    out = []
    for item in items:
        name, sep, p = item.rpartition(":")
        if not sep or not name:
            raise MdpFormatError(lineno, f"expected state:probability, found {item!r}")
        if name not in known:
            raise MdpFormatError(lineno, f"unknown state {name!r}")
        out.append((known[name], _prob(p, lineno)))
    return out


def parse_mdp(text: str, validate: bool = True) -> Mdp:
    states = actions = None
    sidx: dict = {}
    aidx: dict = {}
    init = None
    labels: dict = {}
    rows: dict = {}
    header = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not header:
            if line != "mdp":
                raise MdpFormatError(lineno, "expected header 'mdp'")
            header = True
            continue
        head, sep, rest = line.partition(":")
        if not sep:
            raise MdpFormatError(lineno, f"expected ':' in {line!r}")
        words = head.split()
        items = rest.split()
        kw = words[0]
        if kw == "states" and len(words) == 1:
            if states is not None:
                raise MdpFormatError(lineno, "duplicate states line")
            states = items
            sidx = {s: i for i, s in enumerate(states)}
            if len(sidx) != len(states):
                raise MdpFormatError(lineno, "duplicate state name")
        elif kw == "actions" and len(words) == 1:
            if actions is not None:
                raise MdpFormatError(lineno, "duplicate actions line")
            actions = items
            aidx = {a: i for i, a in enumerate(actions)}
            if len(aidx) != len(actions):
                raise MdpFormatError(lineno, "duplicate action name")
        elif kw == "init" and len(words) == 1:
            if states is None:
                raise MdpFormatError(lineno, "init before states")
            init = _dist(items, lineno, sidx)
        elif kw == "label" and len(words) == 2:
            if words[1] not in sidx:
                raise MdpFormatError(lineno, f"unknown state {words[1]!r}")
            labels.setdefault(sidx[words[1]], set()).update(items)
        elif kw == "trans" and len(words) == 3:
            if states is None or actions is None:
                raise MdpFormatError(lineno, "trans before states and actions")
            s, a = words[1], words[2]
            if s not in sidx:
                raise MdpFormatError(lineno, f"unknown state {s!r}")
            if a not in aidx:
                raise MdpFormatError(lineno, f"unknown action {a!r}")
            row = rows.setdefault(sidx[s], [])
            if any(x == aidx[a] for x, _ in row):
                raise MdpFormatError(lineno, f"duplicate transition for ({s},{a})")
            row.append((aidx[a], _dist(items, lineno, sidx)))
        else:
            raise MdpFormatError(lineno, f"unrecognized line {line!r}")
    if not header:
        raise MdpFormatError(1, "expected header 'mdp'")
    if states is None or actions is None or init is None:
        raise MdpFormatError(0, "missing states, actions or init line")
    lab = [frozenset(labels.get(i, ())) for i in range(len(states))]
    ap = set().union(*lab) if lab else set()
    m = Mdp(states, actions, [rows.get(i, []) for i in range(len(states))], init, ap, lab)
    if validate:
        errs = validate_mdp(m)
        if errs:
            raise InvalidMdp(errs)
    return m


def read_mdp(path, validate: bool = True) -> Mdp:
    return parse_mdp(Path(path).read_text(), validate)


def _fmt(p: float) -> str:
    return repr(float(p)) if p != 1.0 else "1"


def format_mdp(m: Mdp) -> str:
    out = ["mdp", "states: " + " ".join(map(str, m.states)), "actions: " + " ".join(map(str, m.actions))]
    out.append("init: " + " ".join(f"{m.states[s]}:{_fmt(p)}" for s, p in m.init))
    for s in range(m.num_states):
        if m.label[s]:
            out.append(f"label {m.states[s]}: " + " ".join(sorted(m.label[s])))
    for s in range(m.num_states):
        for a, dist in m.trans[s]:
            body = " ".join(f"{m.states[t]}:{_fmt(p)}" for t, p in dist)
            out.append(f"trans {m.states[s]} {m.actions[a]}: {body}")
    return "\n".join(out) + "\n"


def write_mdp(m: Mdp, path) -> None:
    Path(path).write_text(format_mdp(m))
