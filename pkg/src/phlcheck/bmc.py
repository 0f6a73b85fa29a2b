"""Bounded witness search over deterministic finite-memory scheduler tuples.

Schedulers are enumerated as canonical tables.  A table with ``m`` memory
states assigns to every position ``(q, s)`` (memory major, then state id) an
entry ``(i, q')``: the ``i``-th enabled action of ``s`` and the next memory.
A table is canonical when

* entries of positions unreachable from the initial states are ``(0, 0)``;
* memory labels appear in scan order of reachable positions (each new label
  is one more than the largest seen so far), and all ``m`` labels occur;
* no two memory states are equivalent on the positions where both are
  reachable, so the same behaviour is never produced with more memory.

Minimal tables may still assign memory labels differently without changing
behaviour, so the stream also drops any table whose behaviour key (the
bisimulation quotient of its reachable positions) was already produced.

Tables are produced in lexicographic order per memory size, sizes ascending.
Tuples are visited diagonally (by index sum, then lexicographically) so every
component advances even when the stream is astronomically long.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from phlcheck.analysis.chain import AutomataCache
from phlcheck.analysis.hyper import check_hyper_body_on_chains
from phlcheck.analysis.predicate import evaluate_predicate
from phlcheck.analysis.verdict import NoWitnessWithinBound, WitnessFound
from phlcheck.composition import SelfCompositionMdp
from phlcheck.errors import ClassificationError, ConfigError
from phlcheck.logic import phl as P
from phlcheck.logic.parser import parse_phl
from phlcheck.mdp import FiniteMemoryScheduler, compose_schedulers, induced_chain


# --- canonical scheduler tables ---------------------------------------------

@dataclass(frozen=True)
class SchedulerTable:
    memory: int
    entries: tuple  # entries[q * n + s] = (action index, next memory)

    @property
    def encoding(self) -> tuple:
        return (self.memory, self.entries)

    def scheduler(self, m) -> FiniteMemoryScheduler:
        n = m.num_states
        act, upd = {}, {}
        for q in range(self.memory):
            for s in range(n):
                i, q2 = self.entries[q * n + s]
                en = m.enabled(s)
                a = en[i]
                act[(q, s)] = a
                if q2 != q:
                    upd[(q, s, a)] = q2
        return FiniteMemoryScheduler(self.memory, act, upd)

    def describe(self, m) -> list:
        """Reachable entries as ``[memory, state, action, next memory]`` rows."""
        n = m.num_states
        rows = []
        for q, s in sorted(_reachable(m, self.memory, self.entries)):
            i, q2 = self.entries[q * n + s]
            rows.append([q, str(m.states[s]), str(m.actions[m.enabled(s)[i]]), q2])
        return rows


def _reachable(m, mem: int, entries, wildcard_from: int | None = None) -> set:
    """Reachable positions; positions at index >= ``wildcard_from`` may take any entry."""
    n = m.num_states
    start = {(0, s) for s, p in m.initial() if p > 0}
    seen = set(start)
    todo = list(start)
    while todo:
        q, s = todo.pop()
        pos = q * n + s
        if wildcard_from is not None and pos >= wildcard_from:
            moves = [(a, q2) for a in m.enabled(s) for q2 in range(mem)]
        else:
            i, q2 = entries[pos]
            moves = [(m.enabled(s)[i], q2)]
        for a, q2 in moves:
            for t, p in m.successors(s, a):
                if p > 0 and (q2, t) not in seen:
                    seen.add((q2, t))
                    todo.append((q2, t))
    return seen


def _bisimulation(m, entries, reach: set) -> dict:
    """Classes of reachable positions with the same future behaviour."""
    n = m.num_states
    nodes = sorted(reach)
    cls = {}
    for q, s in nodes:
        i, _ = entries[q * n + s]
        cls[(q, s)] = (s, i)
    while True:
        sig = {}
        for q, s in nodes:
            i, q2 = entries[q * n + s]
            a = m.enabled(s)[i]
            succ = tuple(cls[(q2, t)] for t, p in sorted(m.successors(s, a)) if p > 0)
            sig[(q, s)] = (cls[(q, s)], succ)
        ids = {v: k for k, v in enumerate(sorted(set(sig.values()), key=repr))}
        new = {u: ids[sig[u]] for u in nodes}
        if len(set(new.values())) == len(set(cls.values())):
            return new
        cls = new


def _minimal(m, mem: int, entries, reach: set, cls: dict | None = None) -> bool:
    """No two memory states agree (up to bisimulation) wherever both are reachable."""
    if mem == 1:
        return True
    n = m.num_states
    cls = cls if cls is not None else _bisimulation(m, entries, reach)
    for q1 in range(mem):
        for q2 in range(q1 + 1, mem):
            if all(cls[(q1, s)] == cls[(q2, s)] for s in range(n) if (q1, s) in reach and (q2, s) in reach):
                return False
    return True


def behaviour_key(m, table: "SchedulerTable") -> tuple:
    """Canonical form of the behaviour: the bisimulation quotient numbered breadth first.

    Two deterministic schedulers choose the same action after every history
    exactly when their keys are equal.
    """
    n = m.num_states
    reach = _reachable(m, table.memory, table.entries)
    cls = _bisimulation(m, table.entries, reach)
    order: dict = {}
    queue = []
    for s in sorted(s for s, p in m.initial() if p > 0):
        if cls[(0, s)] not in order:
            order[cls[(0, s)]] = len(order)
            queue.append((0, s))
    out = []
    k = 0
    while k < len(queue):
        q, s = queue[k]
        k += 1
        i, q2 = table.entries[q * n + s]
        succ = []
        for t, p in sorted(m.successors(s, m.enabled(s)[i])):
            if p > 0:
                c = cls[(q2, t)]
                if c not in order:
                    order[c] = len(order)
                    queue.append((q2, t))
                succ.append(order[c])
        out.append((s, i, tuple(succ)))
    return tuple(out)


def is_canonical(m, table: SchedulerTable) -> bool:
    mem, entries = table.memory, table.entries
    n = m.num_states
    reach = _reachable(m, mem, entries)
    top = 0
    for pos, (i, q2) in enumerate(entries):
        q, s = divmod(pos, n)
        if (q, s) not in reach:
            if (i, q2) != (0, 0):
                return False
            continue
        if q2 > top + 1:
            return False
        top = max(top, q2)
    if {q for q, _ in reach} != set(range(mem)):
        return False
    return _minimal(m, mem, entries, reach)


def _tables(m, mem: int):
    n = m.num_states
    size = mem * n
    entries = [(0, 0)] * size

    def rec(pos: int, top: int):
        if pos == size:
            t = SchedulerTable(mem, tuple(entries))
            if is_canonical(m, t):
                yield t
            return
        q, s = divmod(pos, n)
        if (q, s) not in _reachable(m, mem, entries, wildcard_from=pos):
            entries[pos] = (0, 0)
            yield from rec(pos + 1, top)
            return
        # every label up to mem - 1 must still be introducible
        for i in range(len(m.enabled(s))):
            for q2 in range(min(mem, top + 2)):
                entries[pos] = (i, q2)
                yield from rec(pos + 1, max(top, q2))
        entries[pos] = (0, 0)

    yield from rec(0, 0)


def enumerate_tables(m, bound: int):
    if bound < 1:
        raise ConfigError("memory bound must be at least 1")
    seen: set = set()
    for mem in range(1, bound + 1):
        for t in _tables(m, mem):
            # distinct minimal tables can still label memory differently for one behaviour
            key = behaviour_key(m, t)
            if key not in seen:
                seen.add(key)
                yield t


def enumerate_schedulers(m, bound: int):
    """Deterministic finite-memory schedulers with at most ``bound`` memory states."""
    for t in enumerate_tables(m, bound):
        yield t.scheduler(m)


class _Stream:
    """Random access over a lazily generated scheduler stream."""

    def __init__(self, gen):
        self._gen = gen
        self.items: list = []
        self.done = False
        self.elapsed = 0.0  # seconds spent generating tables

    def get(self, i: int):
        t = time.perf_counter()
        while len(self.items) <= i and not self.done:
            try:
                self.items.append(next(self._gen))
            except StopIteration:
                self.done = True
        self.elapsed += time.perf_counter() - t
        return self.items[i] if i < len(self.items) else None


def diagonal_indices(n: int, stream: _Stream):
    """Index tuples by ascending sum, then lexicographically, within the stream length."""
    for d in itertools.count():
        if stream.done and d > n * (len(stream.items) - 1):
            return
        stream.get(d)
        length = len(stream.items)
        any_yield = False
        for combo in _compositions(d, n):
            if max(combo) < length:
                any_yield = True
                yield combo
        if stream.done and not any_yield and d > n * (length - 1):
            return


def _compositions(d: int, n: int):
    if n == 1:
        yield (d,)
        return
    for first in range(d + 1):
        for rest in _compositions(d - first, n - 1):
            yield (first,) + rest


# --- the search loop ---------------------------------------------------------

@dataclass
class BmcConfig:
    bound: int = 1
    max_iterations: int | None = None
    threads: int = 1
    batch: int = 16
    progress: object = None  # callable(iterations, elapsed_s, tuples_per_s)
    cache: AutomataCache | None = None


@dataclass
class BmcResult:
    verdict: object
    iterations: int = 0
    passed_filter: int = 0
    exclusion_log: list = field(default_factory=list)
    rows: list = field(default_factory=list)  # per-iteration timings
    knife_edges: int = 0
    schedulers_generated: int = 0
    witness_tables: tuple = ()
    witness_knife_edge: bool = False
    sched_vars: tuple = ()
    predicate_terms: tuple = ()


def _existential_parts(f):
    d = P.decompose(f)
    if d is None or d.kind != "exists":
        raise ClassificationError(P.fragment_diagnostic(f) or "formula is not existential")
    return d


def _check_paths(hyper):
    if hyper is not None and not hyper.universal:
        raise ConfigError("existential path quantifiers inside the hyper body are not supported")


def bmc_check(m, f, cfg: BmcConfig | None = None) -> BmcResult:
    """Search for a scheduler tuple satisfying ``exists s1..sn. (chi /\\ pred)``."""
    if isinstance(f, str):
        f = parse_phl(f)
    d = _existential_parts(f)
    _check_paths(d.hyper)
    return _search(m, d.sched_vars, d.hyper, d.predicate, cfg or BmcConfig())


def refute_universal(m, f, cfg: BmcConfig | None = None) -> BmcResult:
    """Look for a counterexample to ``forall s1..sn. (chi -> pred)``."""
    if isinstance(f, str):
        f = parse_phl(f)
    d = P.decompose(f)
    if d is None or d.kind != "forall" or d.predicate is None:
        raise ClassificationError(P.fragment_diagnostic(f) or "formula is not universal")
    _check_paths(d.hyper)
    return _search(m, d.sched_vars, d.hyper, P.negate_predicate(d.predicate), cfg or BmcConfig())


def _search(m, sched_vars, hyper, pred, cfg: BmcConfig) -> BmcResult:
    if cfg.bound < 1:
        raise ConfigError("memory bound must be at least 1")
    cache = cfg.cache or AutomataCache()
    tables_gen = enumerate_tables(m, cfg.bound)
    stream = _Stream(tables_gen)
    chains: dict = {}
    n = len(sched_vars)
    result = BmcResult(verdict=None, sched_vars=tuple(sched_vars))
    excluded: set = set()
    t0 = time.perf_counter()

    def chain_of(i):
        c = chains.get(i)
        if c is None:
            c = chains[i] = induced_chain(m, stream.items[i].scheduler(m))
        return c

    def evaluate(idx):
        members = [chain_of(i) for i in idx]
        tm = time.perf_counter()
        by_var = dict(zip(sched_vars, members))
        ok = True
        if hyper is not None:
            ok = check_hyper_body_on_chains(by_var, hyper, cache)
        pv = None
        if ok and pred is not None:
            scheds = [stream.items[i].scheduler(m) for i in idx]
            pv = evaluate_predicate(
                pred, by_var,
                composed=lambda: induced_chain(SelfCompositionMdp(m, sched_vars), compose_schedulers(scheds)),
                cache=cache)
        return idx, ok, pv, time.perf_counter() - tm

    def batches():
        buf = []
        for idx in diagonal_indices(n, stream):
            buf.append(idx)
            if len(buf) >= max(1, cfg.batch):
                yield buf
                buf = []
        if buf:
            yield buf

    charged = 0.0
    pool = ThreadPoolExecutor(max_workers=cfg.threads) if cfg.threads > 1 else None
    try:
        for batch in batches():
            if cfg.max_iterations is not None:
                left = cfg.max_iterations - result.iterations
                if left <= 0:
                    break
                batch = batch[:left]
            # synthesis: generating the tables a tuple needs and inducing their chains
            synth = {}
            for idx in batch:
                ts = time.perf_counter()
                for i in idx:
                    chain_of(i)
                synth[idx] = time.perf_counter() - ts + stream.elapsed - charged
                charged = stream.elapsed
            todo = [idx for idx in batch if tuple(stream.items[i].encoding for i in idx) not in excluded]
            outs = list(pool.map(evaluate, todo)) if pool else [evaluate(idx) for idx in todo]
            for idx, ok, pv, mc in outs:
                result.iterations += 1
                row = {"iteration": result.iterations, "synthesis_ms": synth[idx] * 1e3,
                       "model_checking_ms": mc * 1e3}
                result.rows.append(row)
                key = tuple(stream.items[i].encoding for i in idx)
                if ok:
                    result.passed_filter += 1
                if pv is not None and pv.knife_edge:
                    result.knife_edges += 1
                if ok and (pred is None or _counts(pred, pv)):
                    tables = tuple(stream.items[i] for i in idx)
                    result.verdict = WitnessFound(
                        schedulers=tuple(t.scheduler(m) for t in tables),
                        value=pv.value if pv is not None else float("nan"),
                        iteration=result.iterations,
                        indices=tuple(idx),
                    )
                    result.witness_tables = tables
                    result.witness_knife_edge = bool(pv is not None and pv.knife_edge)
                    result.predicate_terms = pv.terms if pv is not None else ()
                    result.schedulers_generated = len(stream.items)
                    _report_progress(cfg, result, t0)
                    return result
                excluded.add(key)
                result.exclusion_log.append(key)
            _report_progress(cfg, result, t0)
    finally:
        if pool:
            pool.shutdown()
    notes = ["only deterministic schedulers are searched; a randomized scheduler may still be a witness"]
    if result.knife_edges:
        notes.append(f"{result.knife_edges} tuples sat within 1e-9 of a strict bound and were not counted")
    result.schedulers_generated = len(stream.items)
    result.verdict = NoWitnessWithinBound(cfg.bound, result.iterations, tuple(notes))
    return result


def _report_progress(cfg, result, t0) -> None:
    if cfg.progress is not None:
        el = time.perf_counter() - t0
        cfg.progress(result.iterations, el, result.iterations / el if el > 0 else 0.0)


def recheck_witness(m, f, result: BmcResult, universal: bool) -> bool:
    """Re-verify a witness with fresh chains and automata."""
    if not isinstance(result.verdict, WitnessFound):
        return False
    if isinstance(f, str):
        f = parse_phl(f)
    d = P.decompose(f)
    pred = P.negate_predicate(d.predicate) if universal else d.predicate
    scheds = [t.scheduler(m) for t in result.witness_tables]
    cache = AutomataCache()
    by_var = {v: induced_chain(m, s) for v, s in zip(d.sched_vars, scheds)}
    if d.hyper is not None and not check_hyper_body_on_chains(by_var, d.hyper, cache):
        return False
    if pred is None:
        return True
    pv = evaluate_predicate(
        pred, by_var,
        composed=lambda: induced_chain(SelfCompositionMdp(m, d.sched_vars), compose_schedulers(scheds)),
        cache=cache)
    return _counts(pred, pv)


def _counts(pred, pv) -> bool:
    # within the tolerance band only non-strict comparisons are accepted
    if pv.knife_edge:
        return pv.satisfied and pred.comparator in ("<=", ">=")
    return pv.satisfied
