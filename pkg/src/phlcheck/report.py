"""Machine-readable run reports.

A report is one JSON object with sorted keys and ``"schema": 1``.  Every
wall-clock quantity lives under ``"timings"`` so two runs on the same
inputs differ only there.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

SCHEMA = 1
FIELDS = ("schema", "command", "verdict", "c_star", "sizes", "iterations", "witness", "diagnostics", "timings")


@dataclass
class RunReport:
    command: str
    verdict: dict
    c_star: float | None = None
    sizes: dict = field(default_factory=dict)
    iterations: int = 0
    witness: dict | None = None
    diagnostics: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    schema: int = SCHEMA

    def to_json(self) -> str:
        return json.dumps(_clean(asdict(self)), sort_keys=True, indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        data = json.loads(text)
        missing = [k for k in FIELDS if k not in data]
        if missing:
            raise ValueError(f"report is missing fields: {', '.join(missing)}")
        if data["schema"] != SCHEMA:
            raise ValueError(f"unsupported report schema {data['schema']!r}")
        return cls(**{k: data[k] for k in FIELDS})

    def without_timings(self) -> str:
        d = _clean(asdict(self))
        d.pop("timings")
        return json.dumps(d, sort_keys=True, indent=2)


def _clean(x):
    # JSON has no NaN or infinities; tuples become lists so the round trip is exact
    if isinstance(x, float):
        return x if math.isfinite(x) else None
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def verdict_dict(v) -> dict:
    out = {"kind": v.kind}
    if v.kind in ("Holds", "Inconclusive"):
        out["c_star"] = v.c_star
        out["bound"] = v.bound
        if v.kind == "Inconclusive":
            out["reason"] = v.reason
    elif v.kind == "WitnessFound":
        out["value"] = v.value
        out["iteration"] = v.iteration
        out["indices"] = list(v.indices)
    else:
        out["memory_bound"] = v.bound
        out["schedulers_checked"] = v.schedulers_checked
        out["notes"] = list(v.notes)
    return out


def approx_report(res) -> RunReport:
    return RunReport(
        command="approx",
        verdict=verdict_dict(res.verdict),
        c_star=res.c_star,
        sizes=dict(res.sizes),
        iterations=res.iterations,
        diagnostics=list(res.diagnostics) + ([f"normalized predicate: {res.normalized}"] if res.normalized else []),
        timings={k: max(0.0, v) for k, v in res.timings.items()},
    )


def bmc_report(m, res, mode: str, recheck: bool | None = None, extra_timings: dict | None = None) -> RunReport:
    witness = None
    if res.verdict.kind == "WitnessFound":
        witness = {
            "schedulers": [
                {"variable": v, "memory": t.memory, "table": t.describe(m)}
                for v, t in zip(res.sched_vars, res.witness_tables)
            ],
            "term_probabilities": [float(x) for x in res.predicate_terms],
            "value": res.verdict.value,
            "knife_edge": res.witness_knife_edge,
        }
    diags = [f"mode: {mode}"]
    if res.verdict.kind == "NoWitnessWithinBound":
        diags.extend(res.verdict.notes)
    if res.witness_knife_edge:
        diags.append("witness value lies within 1e-9 of the bound")
    if recheck is not None:
        diags.append(f"recheck: {'confirmed' if recheck else 'FAILED'}")
    timings = {"rows": [dict(r) for r in res.rows]}
    timings["synthesis_ms"] = sum(r["synthesis_ms"] for r in res.rows)
    timings["model_checking_ms"] = sum(r["model_checking_ms"] for r in res.rows)
    timings.update(extra_timings or {})
    return RunReport(
        command="bmc",
        verdict=verdict_dict(res.verdict),
        c_star=None,
        sizes={
            "mdp_states": m.num_states,
            "mdp_transitions": m.num_transitions(),
            "schedulers_generated": res.schedulers_generated,
            "tuples_passing_hyper_body": res.passed_filter,
            "excluded_tuples": len(res.exclusion_log),
        },
        iterations=res.iterations,
        witness=witness,
        diagnostics=diags,
        timings=timings,
    )
