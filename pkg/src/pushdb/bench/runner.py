"""Benchmark runner: timed trials with the paper-style phase breakdown.

Plan compilation happens once, before the timed phases (compilation
precedes data load). Every trial rebuilds fresh structures, times the
load, times the execution, and the report carries averages plus the raw
per-trial values.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Optional

try:
    import resource
except ImportError:  # non-POSIX platform: peak RSS reported absent
    resource = None

from ..datalog.terms import Atom, Program
from ..errors import PushdbError
from ..ops import RunConfig, RunOutcome, collect_declarations, single_run
from ..planner.columns import DomainDeclarations
from ..planner.plan import compile_plan


@dataclass
class BenchReport:
    engine: str
    set_impl: str
    dedup_mode: str
    trials: int
    answer_count: int
    load_ms: float
    execution_ms: float
    total_ms: float
    compile_ms: float
    per_trial: list[dict] = field(default_factory=list)
    answers_produced: int = 0
    derivations_attempted: int = 0
    facts_pushed: int = 0
    duplicates_rejected: int = 0
    values_saved: int = 0
    values_restored: int = 0
    structure_bytes: Optional[int] = None
    peak_rss_bytes: Optional[int] = None
    load_facts_parsed: int = 0
    load_facts_stored: int = 0
    pe_fell_back: bool = False
    truncated: bool = False
    plan_dump: Optional[str] = None

    def to_dict(self) -> dict:
        d = {
            "engine": self.engine,
            "set_impl": self.set_impl,
            "dedup": self.dedup_mode,
            "trials": self.trials,
            "answers": self.answer_count,
            "load_ms": round(self.load_ms, 3),
            "execution_ms": round(self.execution_ms, 3),
            "total_ms": round(self.total_ms, 3),
            "compile_ms": round(self.compile_ms, 3),
            "derivations_attempted": self.derivations_attempted,
            "facts_pushed": self.facts_pushed,
            "duplicates_rejected": self.duplicates_rejected,
            "values_saved": self.values_saved,
            "values_restored": self.values_restored,
            "load_facts_parsed": self.load_facts_parsed,
            "load_facts_stored": self.load_facts_stored,
            "structure_bytes": self.structure_bytes,
            "peak_rss_bytes": self.peak_rss_bytes,
            "pe_fell_back": self.pe_fell_back,
            "truncated": self.truncated,
            "per_trial": self.per_trial,
        }
        if self.plan_dump is not None:
            d["plan_dump"] = self.plan_dump
        return d

    def kv_lines(self) -> str:
        """Machine-readable one-key-per-line form (times ms, sizes bytes)."""
        d = self.to_dict()
        d.pop("per_trial", None)
        d.pop("plan_dump", None)
        lines = [f"{k}={'' if v is None else v}" for k, v in d.items()]
        for i, trial in enumerate(self.per_trial):
            for k, v in trial.items():
                lines.append(f"trial{i}.{k}={v}")
        return "\n".join(lines) + "\n"

    def human_table(self) -> str:
        rows = [
            ("engine", self.engine),
            ("set impl", self.set_impl),
            ("dedup", self.dedup_mode),
            ("trials", str(self.trials)),
            ("answers", f"{self.answer_count:,}"),
            ("compile (ms)", f"{self.compile_ms:,.1f}"),
            ("load (ms)", f"{self.load_ms:,.1f}"),
            ("execution (ms)", f"{self.execution_ms:,.1f}"),
            ("total (ms)", f"{self.total_ms:,.1f}"),
            ("derivations", f"{self.derivations_attempted:,}"),
            ("duplicates rejected", f"{self.duplicates_rejected:,}"),
        ]
        if self.structure_bytes is not None:
            rows.append(("structure bytes", f"{self.structure_bytes:,}"))
        if self.peak_rss_bytes is not None:
            rows.append(("peak RSS bytes", f"{self.peak_rss_bytes:,}"))
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def _peak_rss_bytes() -> Optional[int]:
    if resource is None:
        return None
    rss = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    return rss * 1024  # Linux reports KiB


def run_benchmark(
    program: Program,
    inline_facts: list[Atom],
    data_paths: list[str],
    config: RunConfig,
    *,
    trials: int = 1,
    declarations: Optional[DomainDeclarations] = None,
    dump_plan: bool = False,
) -> BenchReport:
    if trials < 1:
        raise PushdbError("trials must be >= 1")
    config.validate()
    if declarations is None:
        declarations = collect_declarations(data_paths)

    compile_ms = 0.0
    plan_dump = None
    if config.engine in ("push-pe", "push-simple"):
        t0 = time.perf_counter()
        variant = "pe" if config.engine == "push-pe" else "simple"
        plan = compile_plan(program, variant=variant, dedup_mode=config.dedup_mode,
                            guard=config.guard, declarations=declarations)
        compile_ms = (time.perf_counter() - t0) * 1000.0
        if dump_plan:
            plan_dump = plan.dump()

    per_trial = []
    outcome: Optional[RunOutcome] = None
    for _t in range(trials):
        t0 = time.perf_counter()
        outcome = single_run(program, inline_facts, data_paths, config, declarations)
        total = time.perf_counter() - t0
        per_trial.append({
            "load_ms": round(outcome.load_seconds * 1000.0, 3),
            "execution_ms": round(outcome.execute_seconds * 1000.0, 3),
            "total_ms": round(total * 1000.0, 3),
            "answers": outcome.answer_count,
        })

    assert outcome is not None
    avg = lambda key: sum(t[key] for t in per_trial) / len(per_trial)
    report = BenchReport(
        engine=config.engine,
        set_impl=config.set_impl,
        dedup_mode="none" if config.nodedup else config.dedup_mode,
        trials=trials,
        answer_count=outcome.answer_count,
        load_ms=avg("load_ms"),
        execution_ms=avg("execution_ms"),
        total_ms=avg("total_ms"),
        compile_ms=compile_ms,
        per_trial=per_trial,
        pe_fell_back=outcome.pe_fell_back,
        truncated=outcome.truncated,
        plan_dump=plan_dump,
        load_facts_parsed=outcome.load_stats.facts_parsed,
        load_facts_stored=outcome.load_stats.stored,
        peak_rss_bytes=_peak_rss_bytes(),
    )
    if outcome.stats is not None:
        s = outcome.stats
        report.answers_produced = s.answers_produced
        report.derivations_attempted = s.derivations_attempted
        report.facts_pushed = s.facts_pushed
        report.duplicates_rejected = s.duplicates_rejected
        report.values_saved = s.values_saved
        report.values_restored = s.values_restored
    if outcome.database is not None:
        report.structure_bytes = outcome.database.memory_report().total_bytes
    return report
