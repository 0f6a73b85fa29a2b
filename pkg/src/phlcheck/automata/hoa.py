"""Reader for hand-written Rabin automata in a small HOA-like text format.

Example::

    DRA
    AP: a@s1
    States: 2
    Start: 0
    Pair: bad 1 good 0
    0 [a@s1] 0
    0 [!a@s1] 1
    1 [t] 1

Guards are conjunctions of literals joined by ``&`` (``t`` is true).  The
edges of each state must cover every letter exactly once.  ``Pair`` lines
list the ``B`` and ``G`` state sets of one Rabin pair; either may be empty.
"""

from __future__ import annotations

import re

from phlcheck.automata.dra import ExplicitDra
from phlcheck.automata.nba import all_letters
from phlcheck.errors import AutomatonFormatError

def _int(text: str, lineno: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise AutomatonFormatError(lineno, f"expected a number, found {text.strip()!r}") from None


_EDGE = re.compile(r"^(\d+)\s*\[([^\]]*)\]\s*(\d+)$")


def _guard(text: str, ap: tuple, lineno: int):
    text = text.strip()
    if text == "t":
        return lambda letter: True
    lits = []
    for part in text.split("&"):
        part = part.strip()
        neg = part.startswith("!")
        name = part[1:].strip() if neg else part
        if name not in ap:
            raise AutomatonFormatError(lineno, f"unknown proposition {name!r}")
        lits.append((name, neg))
    return lambda letter, lits=tuple(lits): all((n in letter) != neg for n, neg in lits)


def parse_dra(text: str, source: str = "") -> ExplicitDra:
    ap: tuple | None = None
    n = start = None
    pairs = []
    edges: dict = {}
    seen_header = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not seen_header:
            if line != "DRA":
                raise AutomatonFormatError(lineno, "expected header 'DRA'")
            seen_header = True
            continue
        key, _, rest = line.partition(":")
        if key == "AP" and _:
            ap = tuple(rest.split())
        elif key == "States" and _:
            n = _int(rest, lineno)
        elif key == "Start" and _:
            start = _int(rest, lineno)
        elif line.startswith("Pair:"):
            words = line[len("Pair:"):].split()
            sets = {"bad": set(), "good": set()}
            cur = None
            for w in words:
                if w in sets:
                    cur = sets[w]
                elif cur is not None and w.isdigit():
                    cur.add(int(w))
                else:
                    raise AutomatonFormatError(lineno, f"bad pair item {w!r}")
            pairs.append((sets["bad"], sets["good"]))
        else:
            m = _EDGE.match(line)
            if not m:
                raise AutomatonFormatError(lineno, f"unrecognized line {line!r}")
            if ap is None:
                raise AutomatonFormatError(lineno, "edge before AP line")
            q, dst = int(m.group(1)), int(m.group(3))
            edges.setdefault(q, []).append((_guard(m.group(2), ap, lineno), dst, lineno))
    if not seen_header or ap is None or n is None or start is None:
        raise AutomatonFormatError(0, "missing DRA, AP, States or Start line")
    delta = {}
    for q in range(n):
        for letter in all_letters(ap):
            hits = [(dst, ln) for g, dst, ln in edges.get(q, []) if g(letter)]
            if len(hits) != 1:
                what = "no edge" if not hits else "several edges"
                raise AutomatonFormatError(
                    hits[-1][1] if hits else 0, f"{what} for state {q} on letter {sorted(letter)}")
            if not 0 <= hits[0][0] < n:
                raise AutomatonFormatError(hits[0][1], f"target {hits[0][0]} out of range")
            delta[(q, letter)] = hits[0][0]
    return ExplicitDra(ap, n, start, delta, pairs, source=source)
