"""Command-line front end: ``phlcheck approx|bmc|gen-grid|validate``.

Exit codes: 0 Holds or WitnessFound, 1 Inconclusive or NoWitnessWithinBound,
2 usage, parse, classification or configuration errors, 3 resource caps.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from phlcheck import errors
from phlcheck.approx import ApproxConfig, approx_check
from phlcheck.automata.dra import DEFAULT_TREE_CAP
from phlcheck.automata.hoa import parse_dra
from phlcheck.automata.nba import DEFAULT_CLOSURE_CAP
from phlcheck.bmc import BmcConfig, bmc_check, recheck_witness, refute_universal
from phlcheck.composition import DEFAULT_SIZE_CAP
from phlcheck.grid import DEFAULT_SLIP, grid_mdp, non_interference_formula
from phlcheck.logic import phl as P
from phlcheck.logic.parser import parse_phl
from phlcheck.logic.printer import pretty_print
from phlcheck.mdp import validate_mdp
from phlcheck.mdpfile import format_mdp, parse_mdp, read_mdp
from phlcheck.report import approx_report, bmc_report

EXIT = {"Holds": 0, "WitnessFound": 0, "Inconclusive": 1, "NoWitnessWithinBound": 1}


def _read_text(path: str) -> str:
    return sys.stdin.read() if path == "-" else Path(path).read_text()


def _emit(report, out: str | None) -> None:
    text = report.to_json()
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _summary(report) -> str:
    v = report.verdict
    extra = ""
    if "c_star" in v:
        extra = f" c*={v['c_star']:.6g} bound={v['bound']:.6g}"
    elif v["kind"] == "WitnessFound":
        extra = f" at iteration {v['iteration']}"
    return f"{v['kind']}{extra}"


def cmd_approx(args) -> int:
    m = read_mdp(args.mdp)
    f = parse_phl(_read_text(args.formula))
    automata = None
    if args.dra:
        automata = [parse_dra(Path(p).read_text(), source=p) for p in args.dra]
    cfg = ApproxConfig(closure_cap=args.closure_cap, tree_cap=args.automaton_cap,
                       size_cap=args.size_cap, max_iter=args.max_iter, automata=automata)
    res = approx_check(m, f, cfg)
    report = approx_report(res)
    _emit(report, args.out)
    print(_summary(report), file=sys.stderr)
    return EXIT[report.verdict["kind"]]


def cmd_bmc(args) -> int:
    m = read_mdp(args.mdp)
    f = parse_phl(_read_text(args.formula))
    frag = P.classify_fragment(f)
    cfg = BmcConfig(bound=args.bound, max_iterations=args.max_iter, threads=args.threads)
    if args.progress:
        cfg.progress = lambda it, el, rate: print(f"{it} tuples, {el:.2f} s, {rate:.1f}/s", file=sys.stderr)
    if frag == P.Fragment.EXISTENTIAL_CONJUNCTION:
        mode, universal = "witness search", False
        res = bmc_check(m, f, cfg)
    elif frag == P.Fragment.UNIVERSAL_IMPLICATION:
        mode, universal = "refutation", True
        res = refute_universal(m, f, cfg)
    else:
        raise errors.ClassificationError(P.fragment_diagnostic(f) or "formula is neither universal nor existential")
    recheck = None
    extra = {}
    if args.recheck and res.verdict.kind == "WitnessFound":
        t = time.perf_counter()
        recheck = recheck_witness(m, f, res, universal)
        extra["recheck_ms"] = (time.perf_counter() - t) * 1e3
    report = bmc_report(m, res, mode, recheck, extra)
    _emit(report, args.out)
    print(_summary(report), file=sys.stderr)
    if recheck is False:
        print("recheck failed: the witness did not re-verify", file=sys.stderr)
        return 1
    return EXIT[report.verdict["kind"]]


def cmd_gen_grid(args) -> int:
    if args.robots not in (2, 3):
        raise errors.ConfigError("--robots must be 2 or 3")
    m = grid_mdp(args.size, args.robots, slip=args.slip, lead_slip=args.lead_slip, cap=args.size_cap)
    text = format_mdp(m)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.formula_out:
        Path(args.formula_out).write_text(non_interference_formula(args.robots, args.epsilon))
    print(f"{m.num_states} states, {len(m.actions)} actions, {m.num_transitions()} transitions", file=sys.stderr)
    return 0


def cmd_validate(args) -> int:
    m = parse_mdp(Path(args.mdp).read_text(), validate=False)
    problems = validate_mdp(m)
    for p in problems:
        print(p)
    if args.formula:
        f = parse_phl(_read_text(args.formula))
        P.check_closed(f)
        print(f"formula: {pretty_print(f)}")
        print(f"fragment: {P.classify_fragment(f).value}")
    if problems:
        return 2
    print(f"ok: {m.num_states} states, {len(m.actions)} actions")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phlcheck", description="Check probabilistic hyperproperties of MDPs.")
    sub = ap.add_subparsers(dest="command", required=True)

    def caps(p):
        p.add_argument("--size-cap", type=int, default=DEFAULT_SIZE_CAP, help="cap on composed state spaces")
        p.add_argument("--out", help="write the JSON report here instead of stdout")

    a = sub.add_parser("approx", help="sound over-approximation for universal formulas")
    a.add_argument("mdp")
    a.add_argument("formula", help="formula file, or - for stdin")
    a.add_argument("--automaton-cap", type=int, default=DEFAULT_TREE_CAP, help="cap on Rabin automaton states")
    a.add_argument("--closure-cap", type=int, default=DEFAULT_CLOSURE_CAP, help="cap on Büchi tableau states")
    a.add_argument("--max-iter", type=int, default=1_000_000, help="value-iteration sweep cap")
    a.add_argument("--dra", action="append", metavar="FILE",
                   help="hand-written DRA for a normalized predicate term (repeat in term order)")
    caps(a)
    a.set_defaults(run=cmd_approx)

    b = sub.add_parser("bmc", help="bounded search over deterministic finite-memory schedulers")
    b.add_argument("mdp")
    b.add_argument("formula", help="formula file, or - for stdin")
    b.add_argument("--bound", type=int, default=1, help="largest scheduler memory size")
    b.add_argument("--max-iter", type=int, default=None, help="stop after this many tuples")
    b.add_argument("--threads", type=int, default=1)
    b.add_argument("--recheck", action="store_true", help="re-verify a witness from scratch")
    b.add_argument("--progress", action="store_true", help="print progress to stderr")
    caps(b)
    b.set_defaults(run=cmd_bmc)

    g = sub.add_parser("gen-grid", help="generate a multi-robot grid arena")
    g.add_argument("--size", type=int, required=True)
    g.add_argument("--robots", type=int, default=2)
    g.add_argument("--slip", type=float, default=DEFAULT_SLIP, help="failure probability of robots 2..k")
    g.add_argument("--lead-slip", type=float, default=0.0, help="failure probability of robot 1")
    g.add_argument("--formula-out", help="also write the plan non-interference formula here")
    g.add_argument("--epsilon", default="1/4", help="bound used in the written formula")
    caps(g)
    g.set_defaults(run=cmd_gen_grid)

    v = sub.add_parser("validate", help="check an MDP file and optionally a formula")
    v.add_argument("mdp")
    v.add_argument("--formula")
    v.set_defaults(run=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except errors.CapExceeded as e:
        print(f"error: resource cap: {e}", file=sys.stderr)
        return 3
    except (errors.PhlError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
