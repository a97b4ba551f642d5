"""Normalization of rules with multiple IDB body literals.

The push runtime drives a rule from exactly one IDB literal per rule
application; facts matching the other IDB literals must already sit in
temporary relations. Two forms:

* single-push: one literal drives the rule, the other IDB literals are
  materialized into temporaries. Only sound when every fact for the
  materialized literals arrives before the first fact of the pushing
  literal. We prove that with a conservative reachability analysis over
  the prospective rule-application graph and record ordering constraints
  between the INIT applications involved.

* symmetric: every IDB literal drives its own application, probing the
  temporaries of the others (the single-tuple-delta scheme). Always sound;
  used whenever arrives-last cannot be established.

Temporaries are deduplicated globally by (source predicate, binding
pattern); they hold every fact of the predicate, keyed by the bound
columns of the probe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..datalog.analysis import PredicateGraph, build_predicate_graph
from ..datalog.terms import Atom, Pred, Program
from .bindings import access_pattern_for_atom


@dataclass(frozen=True)
class TempRelation:
    id: int
    source: Pred
    pattern: str  # over the source predicate's columns; b marks probe keys
    name: str

    @property
    def key_cols(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.pattern) if c == "b")

    @property
    def out_cols(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.pattern) if c == "f")


@dataclass(frozen=True)
class BodyAccess:
    atom: Atom
    temp_id: Optional[int]  # None -> EDB access


@dataclass(frozen=True)
class NormRule:
    index: int
    origin: int               # rule index in the source program
    head: Atom
    push: Optional[Atom]      # None -> INIT rule (EDB/temp body only)
    push_origin_pos: int      # body position of the push literal (-1 for INIT)
    body: tuple[BodyAccess, ...]  # join order after the push literal


@dataclass
class NormalizedProgram:
    program: Program
    graph: PredicateGraph
    rules: tuple[NormRule, ...]
    temps: tuple[TempRelation, ...]
    fills: dict[Pred, tuple[int, ...]]  # IDB pred -> temp ids filled on new facts
    # INIT ordering constraints: rules[a]'s INIT must exhaust before rules[b]'s
    init_constraints: tuple[tuple[int, int], ...]
    single_push_origins: dict[int, int]  # origin rule -> chosen literal position

    def plain_program(self) -> Program:
        """Equivalent plain program with temporaries as real IDB predicates.

        Temp probes become ordinary literals of the temp predicate and a
        fill rule ``<temp>(args) :- <source>(args).`` defines it; lets the
        naive engine evaluate the normalized form directly.
        """
        from ..datalog.parser import build_program
        from ..datalog.terms import Rule, Var

        rules = []
        for nr in self.rules:
            body = []
            if nr.push is not None:
                body.append(nr.push)
            for acc in nr.body:
                if acc.temp_id is None:
                    body.append(acc.atom)
                else:
                    temp = self.temps[acc.temp_id]
                    body.append(Atom(temp.name, acc.atom.args))
            rules.append(Rule(nr.head, tuple(body)))
        for temp in self.temps:
            args = tuple(Var(f"X{i}") for i in range(temp.source[1]))
            rules.append(Rule(Atom(temp.name, args), (Atom(temp.source[0], args),)))
        return build_program(rules, [], self.program.query)


class _TempPool:
    def __init__(self):
        self.by_key: dict[tuple[Pred, str], TempRelation] = {}
        self.temps: list[TempRelation] = []

    def get(self, source: Pred, pattern: str) -> int:
        key = (source, pattern)
        temp = self.by_key.get(key)
        if temp is None:
            temp = TempRelation(len(self.temps), source, pattern, f"{source[0]}_{pattern}")
            self.by_key[key] = temp
            self.temps.append(temp)
        return temp.id


def _reachable(start: Pred, successors: dict[Pred, set[Pred]]) -> set[Pred]:
    seen = {start}
    work = [start]
    while work:
        for nxt in successors.get(work.pop(), ()):
            if nxt not in seen:
                seen.add(nxt)
                work.append(nxt)
    return seen


def normalize_rules(program: Program, graph: PredicateGraph | None = None) -> NormalizedProgram:
    if graph is None:
        graph = build_predicate_graph(program)
    clique_of = graph.clique_index()
    idb = program.idb

    # Conservative consumer edges: assume every IDB literal may drive its
    # rule. Reachability over this superset never lets an invalid
    # single-push decision through.
    consumers: dict[Pred, set[Pred]] = {}
    init_rules: list[int] = []  # origin indices of EDB-only rules
    for ri, rule in enumerate(program.rules):
        idb_lits = [a.pred for a in rule.body if a.pred in idb]
        if not idb_lits:
            init_rules.append(ri)
        for p in idb_lits:
            consumers.setdefault(p, set()).add(rule.head.pred)

    # feeders[p] = INIT origins whose cascades can produce p-facts
    feeders: dict[Pred, set[int]] = {p: set() for p in idb}
    for ri in init_rules:
        for p in _reachable(program.rules[ri].head.pred, consumers):
            feeders.setdefault(p, set()).add(ri)

    constraints: set[tuple[int, int]] = set()  # (init origin a, init origin b): a first

    def acyclic_with(extra: set[tuple[int, int]]) -> bool:
        edges = constraints | extra
        succ: dict[int, list[int]] = {}
        indeg: dict[int, int] = {r: 0 for r in init_rules}
        for a, b in edges:
            succ.setdefault(a, []).append(b)
            indeg[b] += 1
        ready = [r for r in init_rules if indeg[r] == 0]
        seen = 0
        while ready:
            n = ready.pop()
            seen += 1
            for m in succ.get(n, ()):
                indeg[m] -= 1
                if indeg[m] == 0:
                    ready.append(m)
        return seen == len(init_rules)

    single_push: dict[int, int] = {}  # origin rule -> literal body position
    for ri, rule in enumerate(program.rules):
        positions = [i for i, a in enumerate(rule.body) if a.pred in idb]
        if len(positions) < 2:
            continue
        # prefer literals whose facts plausibly arrive last
        candidates = sorted(
            positions,
            key=lambda i: (clique_of[rule.body[i].pred], i),
            reverse=True,
        )
        for j in candidates:
            pj = rule.body[j].pred
            fj = feeders.get(pj, set())
            fi: set[int] = set()
            for i in positions:
                if i != j:
                    fi |= feeders.get(rule.body[i].pred, set())
            if fj & fi:
                continue
            extra = {(a, b) for a in fi for b in fj if a != b}
            if not acyclic_with(extra):
                continue
            constraints.update(extra)
            single_push[ri] = j
            break

    # Build the normalized rules.
    pool = _TempPool()
    norm_rules: list[NormRule] = []
    fills: dict[Pred, set[int]] = {}

    def build_variant(origin: int, rule, push_pos: Optional[int], temp_positions: list[int]):
        bound: set[str] = set()
        if push_pos is not None:
            for t in rule.body[push_pos].args:
                if t.is_var:
                    bound.add(t.name)
        body: list[BodyAccess] = []
        for i, atom in enumerate(rule.body):
            if i == push_pos:
                continue
            if i in temp_positions:
                pattern = access_pattern_for_atom(atom, bound)
                temp_id = pool.get(atom.pred, pattern)
                fills.setdefault(atom.pred, set()).add(temp_id)
                body.append(BodyAccess(atom, temp_id))
            else:
                body.append(BodyAccess(atom, None))
            for t in atom.args:
                if t.is_var:
                    bound.add(t.name)
        norm_rules.append(
            NormRule(
                index=len(norm_rules),
                origin=origin,
                head=rule.head,
                push=rule.body[push_pos] if push_pos is not None else None,
                push_origin_pos=push_pos if push_pos is not None else -1,
                body=tuple(body),
            )
        )

    for ri, rule in enumerate(program.rules):
        positions = [i for i, a in enumerate(rule.body) if a.pred in idb]
        if not positions:
            build_variant(ri, rule, None, [])
        elif len(positions) == 1:
            build_variant(ri, rule, positions[0], [])
        elif ri in single_push:
            j = single_push[ri]
            build_variant(ri, rule, j, [i for i in positions if i != j])
        else:
            for j in positions:
                build_variant(ri, rule, j, [i for i in positions if i != j])

    return NormalizedProgram(
        program=program,
        graph=graph,
        rules=tuple(norm_rules),
        temps=tuple(pool.temps),
        fills={p: tuple(sorted(ids)) for p, ids in fills.items()},
        init_constraints=tuple(sorted(constraints)),
        single_push_origins=single_push,
    )
