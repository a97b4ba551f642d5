"""High-level operations: prepare, load, and run a program on any engine.

This is the single entry layer shared by the CLI, the HTTP service, the
benchmark runner and the test suite.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from typing import Optional

from .datalog.parser import parse_program
from .datalog.terms import Atom, Program, Term
from .engine.naive import execute_naive, term_value
from .engine.runtime import AnswerRelation, Database, ExecStats, execute, execute_nodedup
from .engine.seminaive import SeminaivePlan, execute_seminaive
from .engine.store import EdbStore
from .errors import PushdbError
from .loader import DEFAULT_CHUNK_SIZE, LoadStats, load_facts, parse_fact_file, route_facts
from .planner.columns import ColumnDomains, DomainDeclarations
from .planner.plan import PushPlan, compile_plan
from .bench.generators import sidecar_path_for

ENGINES = ("push-pe", "push-simple", "seminaive", "naive")
SET_IMPLS = ("auto", "bitmap", "dynhash", "fixedhash")
DEDUP_MODES = ("all", "clique", "answer-only")


@dataclass
class RunConfig:
    engine: str = "push-pe"
    set_impl: str = "auto"
    dedup_mode: str = "all"
    guard: Optional[int] = None
    count_only: bool = False
    strict_load: bool = False
    chunk_size: int = DEFAULT_CHUNK_SIZE
    nodedup: bool = False
    derivation_limit: Optional[int] = None

    def validate(self) -> None:
        if self.engine not in ENGINES:
            raise PushdbError(f"unknown engine {self.engine!r}; choose from {ENGINES}")
        if self.set_impl not in SET_IMPLS:
            raise PushdbError(f"unknown set implementation {self.set_impl!r}")
        if self.dedup_mode not in DEDUP_MODES:
            raise PushdbError(f"unknown dedup mode {self.dedup_mode!r}")


@dataclass
class RunOutcome:
    engine: str
    answer_count: int
    load_seconds: float
    execute_seconds: float
    load_stats: LoadStats
    stats: Optional[ExecStats] = None
    answers: Optional[AnswerRelation] = None
    naive_relations: Optional[dict] = None
    seminaive_relations: Optional[dict] = None
    database: Optional[Database] = None
    plan: Optional[PushPlan] = None
    truncated: bool = False
    pe_fell_back: bool = False

    def decoded_answers(self, limit: Optional[int] = None) -> list[tuple]:
        """Answers as native Python values (symbols str, integers int)."""
        if self.naive_relations is not None:
            pred = self._naive_answer_pred
            rows = sorted(self.naive_relations.get(pred, ()))
            return rows[:limit] if limit else rows
        if self.answers is None:
            raise PushdbError("answers were not materialized (count-only run)")
        out = []
        for i, row in enumerate(self.answers.decoded()):
            if limit is not None and i >= limit:
                break
            out.append(row)
        return out

    def answer_set(self) -> set[tuple]:
        """Full decoded answer set (for oracle comparisons)."""
        if self.naive_relations is not None:
            return set(self.naive_relations.get(self._naive_answer_pred, ()))
        if self.answers is None:
            raise PushdbError("answers were not materialized (count-only run)")
        return set(self.answers.decoded())

    _naive_answer_pred: Optional[tuple] = None


def read_program(path_or_text: str, *, is_path: bool = True):
    text = open(path_or_text, "r", encoding="utf-8").read() if is_path else path_or_text
    return parse_program(text)


def collect_declarations(
    data_paths: list[str],
    explicit: Optional[str] = None,
) -> DomainDeclarations:
    """Merge domain declarations from sidecar files plus an explicit file."""
    decls = DomainDeclarations()
    for path in data_paths:
        sidecar = sidecar_path_for(path)
        if os.path.exists(sidecar):
            with open(sidecar, "r", encoding="utf-8") as fh:
                decls.merge(DomainDeclarations.from_dict(json.load(fh)))
    if explicit:
        with open(explicit, "r", encoding="utf-8") as fh:
            decls.merge(DomainDeclarations.from_dict(json.load(fh)))
    return decls


def single_run(
    program: Program,
    inline_facts: list[Atom],
    data_paths: list[str],
    config: RunConfig,
    declarations: Optional[DomainDeclarations] = None,
) -> RunOutcome:
    config.validate()
    if declarations is None:
        declarations = collect_declarations(data_paths)

    if config.engine == "naive":
        t0 = time.perf_counter()
        facts = list(inline_facts)
        for path in data_paths:
            facts.extend(parse_fact_file(path, config.chunk_size))
        t_load = time.perf_counter() - t0
        t0 = time.perf_counter()
        relations = execute_naive(program, facts)
        t_exec = time.perf_counter() - t0
        pred = program.answer_pred
        count = len(relations.get(pred, ())) if pred else 0
        outcome = RunOutcome(
            engine="naive",
            answer_count=count,
            load_seconds=t_load,
            execute_seconds=t_exec,
            load_stats=LoadStats(facts_parsed=len(facts)),
            naive_relations=relations,
        )
        outcome._naive_answer_pred = pred
        return outcome

    if config.engine == "seminaive":
        domains = ColumnDomains(program, declarations)
        plan = SeminaivePlan.compile(program, domains)
        t0 = time.perf_counter()
        store = EdbStore(plan.descriptors, domains, config.set_impl)
        load_stats = load_facts(
            data_paths, plan.descriptors, store.structures, domains,
            strict=config.strict_load, chunk_size=config.chunk_size,
        )
        route_facts(inline_facts, plan.descriptors, store.structures, domains,
                    strict=config.strict_load, stats=load_stats)
        t_load = time.perf_counter() - t0
        result = execute_seminaive(plan, store, set_impl=config.set_impl,
                                   count_only=config.count_only)
        return RunOutcome(
            engine="seminaive",
            answer_count=result.answers.count,
            load_seconds=t_load,
            execute_seconds=result.stats.durations["execute"],
            load_stats=load_stats,
            stats=result.stats,
            answers=result.answers,
            seminaive_relations=result.relations,
        )

    variant = "pe" if config.engine == "push-pe" else "simple"
    plan = compile_plan(
        program, variant=variant, dedup_mode=config.dedup_mode,
        guard=config.guard, declarations=declarations,
    )
    t0 = time.perf_counter()
    db = Database(plan, set_impl=config.set_impl)
    load_stats = load_facts(
        data_paths, plan.descriptors, db.edb, plan.domains,
        strict=config.strict_load, chunk_size=config.chunk_size,
    )
    route_facts(inline_facts, plan.descriptors, db.edb, plan.domains,
                strict=config.strict_load, stats=load_stats)
    t_load = time.perf_counter() - t0
    if config.nodedup:
        count, truncated, stats = execute_nodedup(plan, db, config.derivation_limit)
        return RunOutcome(
            engine=config.engine,
            answer_count=count,
            load_seconds=t_load,
            execute_seconds=stats.durations["execute"],
            load_stats=load_stats,
            stats=stats,
            database=db,
            plan=plan,
            truncated=truncated,
            pe_fell_back=plan.pe_fell_back,
        )
    result = execute(plan, db, count_only=config.count_only)
    return RunOutcome(
        engine=config.engine,
        answer_count=result.stats.answers_produced,
        load_seconds=t_load,
        execute_seconds=result.stats.durations["execute"],
        load_stats=load_stats,
        stats=result.stats,
        answers=result.answers,
        database=db,
        plan=plan,
        pe_fell_back=plan.pe_fell_back,
    )


def run_text(text: str, data_paths: Optional[list[str]] = None,
             config: Optional[RunConfig] = None, **config_kw) -> RunOutcome:
    """Convenience: parse program text and run it."""
    program, facts = parse_program(text)
    if config is None:
        config = RunConfig(**config_kw)
    return single_run(program, facts, data_paths or [], config)
