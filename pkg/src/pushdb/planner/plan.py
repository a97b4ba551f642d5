"""Rule-application graph compilation.

Turns a normalized program plus a fact-type set into an executable plan:
rule applications with probe chains, register writes, save sets, ordered
consumer lists, duplicate-check placement and INIT seeding order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..datalog.terms import Pred, Program, pred_to_text, term_to_text
from ..errors import PlanError
from .columns import ColumnDomains, DomainDeclarations
from .facttypes import (
    CONST,
    REG,
    AppSkeleton,
    ExplosionSignal,
    FactTypeResult,
    FactTypeSpec,
    compute_fact_types_pe,
    compute_fact_types_simple,
    default_guard,
)
from .normalize import NormalizedProgram, TempRelation, normalize_rules
from .specialize import EdbDescriptor, specialize_edb

# runtime value sources
S_REG = "reg"      # ('reg', global slot)
S_CONST = "const"  # ('const', encoded value)
S_LOCAL = "local"  # ('local', probe index, out index)

Source = tuple


@dataclass(frozen=True)
class ProbeSpec:
    target: tuple                      # ('edb', descriptor name) | ('temp', temp id)
    kind: str                          # 'scan' | 'probe' | 'member'
    key_sources: tuple[Source, ...]
    out_arity: int
    eq_checks: tuple[tuple[int, Source], ...]  # out index must equal source


@dataclass(frozen=True)
class AppSpec:
    id: int
    norm_rule: int
    origin_rule: int
    input_ft: Optional[int]
    output_ft: int
    guards: tuple[tuple[Source, Source], ...]
    probes: tuple[ProbeSpec, ...]
    head_sources: tuple[Source, ...]
    dup_key_sources: tuple[Source, ...]
    writes: tuple[tuple[int, Source], ...]
    save_slots: tuple[int, ...]
    recursive: bool


@dataclass(frozen=True)
class FactTypeInfo:
    spec: FactTypeSpec
    slots: tuple[int, ...]                       # global registers, canonical order
    slot_positions: tuple[tuple[Pred, int], ...]  # representative column per slot
    dup: bool
    name: str


@dataclass(frozen=True)
class AnswerSpec:
    pred: Optional[Pred]
    arity: int
    ft_ids: tuple[int, ...]
    ride_ft_dup: bool  # single answer fact type: its dup set doubles as answer dedup


@dataclass
class PushPlan:
    program: Program
    norm: NormalizedProgram
    domains: ColumnDomains
    variant: str
    dedup_mode: str
    fact_types: tuple[FactTypeInfo, ...]
    apps: tuple[AppSpec, ...]
    consumers: tuple[tuple[int, ...], ...]
    fills: tuple[tuple[int, ...], ...]
    init_order: tuple[int, ...]
    descriptors: tuple[EdbDescriptor, ...]
    temps: tuple[TempRelation, ...]
    answer: AnswerSpec
    register_count: int
    pe_fell_back: bool = False
    explosion: Optional[ExplosionSignal] = None

    def dump(self) -> str:
        lines = [
            f"plan variant={self.variant} dedup={self.dedup_mode} registers={self.register_count}"
        ]
        for d in self.descriptors:
            filt = "".join(f" [{c}={term_to_text(t)}]" for c, t in d.filters)
            cols = ",".join(str(c) for c in d.retained)
            lines.append(
                f"descriptor {d.name}: {pred_to_text(d.pred)}{filt} cols({cols}) pattern={d.pattern or '-'} {d.kind}"
            )
        for t in self.temps:
            lines.append(f"temp t{t.id} {t.name}: {pred_to_text(t.source)} pattern={t.pattern}")
        for info in self.fact_types:
            dup = " dup" if info.dup else ""
            lines.append(f"fact-type f{info.spec.id}: {info.name}{dup}")
        for app in self.apps:
            src = "INIT" if app.input_ft is None else f"f{app.input_ft}"
            probes = ",".join(
                p.target[1] if p.target[0] == "edb" else f"t{p.target[1]}" for p in app.probes
            )
            extra = ""
            if app.save_slots:
                extra += " save[" + ",".join(f"r{s}" for s in app.save_slots) + "]"
            lines.append(
                f"app a{app.id}: {src} => f{app.output_ft} rule={app.origin_rule} probes[{probes}]{extra}"
            )
        lines.append("init-order: " + " ".join(f"a{a}" for a in self.init_order))
        for ft_id, cons in enumerate(self.consumers):
            if cons:
                lines.append(f"consumers f{ft_id}: " + " ".join(f"a{a}" for a in cons))
        for ft_id, fill in enumerate(self.fills):
            if fill:
                lines.append(f"fills f{ft_id}: " + " ".join(f"t{t}" for t in fill))
        if self.answer.pred is not None:
            lines.append(
                f"answer: {pred_to_text(self.answer.pred)} fts["
                + ",".join(f"f{i}" for i in self.answer.ft_ids)
                + ("] ride-dup" if self.answer.ride_ft_dup else "]")
            )
        return "\n".join(lines) + "\n"


def _ft_name(spec: FactTypeSpec, slots: tuple[int, ...], domains: ColumnDomains) -> str:
    parts = []
    for pos, (kind, v) in enumerate(spec.args):
        if kind == REG:
            parts.append(f"r{slots[v]}")
        else:
            parts.append(term_to_text(domains.decode_value((spec.pred, pos), v)))
    return f"{spec.pred[0]}({', '.join(parts)})" if parts else spec.pred[0]


def build_plan(
    norm: NormalizedProgram,
    ftresult: FactTypeResult,
    descriptors: list[EdbDescriptor],
    access: dict[tuple[int, int], EdbDescriptor],
    domains: ColumnDomains,
    dedup_mode: str = "all",
) -> PushPlan:
    if dedup_mode not in ("all", "clique", "answer-only"):
        raise PlanError(f"unknown dedup mode {dedup_mode!r}")
    program = norm.program
    graph = norm.graph
    clique_of = graph.clique_index()
    recursive = graph.recursive
    answer_pred = program.answer_pred

    # register allocation, duplicate-check placement
    infos: list[FactTypeInfo] = []
    next_reg = 0
    for spec in ftresult.types:
        slots = tuple(range(next_reg, next_reg + spec.n_regs))
        next_reg += spec.n_regs
        positions = tuple((spec.pred, pos) for pos in spec.first_positions())
        if spec.pred in recursive or spec.pred == answer_pred:
            dup = True  # termination and answer-set semantics both need these
        else:
            dup = dedup_mode == "all"
        infos.append(FactTypeInfo(spec, slots, positions, dup, _ft_name(spec, slots, domains)))

    apps: list[AppSpec] = []
    for sk in ftresult.apps:
        app = _compile_app(len(apps), sk, norm, ftresult, infos, access, domains, clique_of)
        if app is not None:
            apps.append(app)

    # consumer lists in source order (origin rule, then literal position)
    consumers: list[list[int]] = [[] for _ in ftresult.types]
    order = sorted(
        (a for a in apps if a.input_ft is not None),
        key=lambda a: (a.origin_rule, norm.rules[a.norm_rule].push_origin_pos, a.id),
    )
    for a in order:
        consumers[a.input_ft].append(a.id)

    fills: list[tuple[int, ...]] = []
    for spec in ftresult.types:
        fills.append(norm.fills.get(spec.pred, ()))

    init_order = _order_inits(norm, apps, clique_of)

    answer_fts = tuple(i for i, spec in enumerate(ftresult.types) if spec.pred == answer_pred)
    ride = len(answer_fts) == 1 and infos[answer_fts[0]].dup
    answer = AnswerSpec(
        pred=answer_pred,
        arity=answer_pred[1] if answer_pred else 0,
        ft_ids=answer_fts,
        ride_ft_dup=ride,
    )

    return PushPlan(
        program=program,
        norm=norm,
        domains=domains,
        variant=ftresult.variant,
        dedup_mode=dedup_mode,
        fact_types=tuple(infos),
        apps=tuple(apps),
        consumers=tuple(tuple(c) for c in consumers),
        fills=tuple(fills),
        init_order=init_order,
        descriptors=tuple(descriptors),
        temps=norm.temps,
        answer=answer,
        register_count=next_reg,
    )


def _compile_app(app_id, sk: AppSkeleton, norm, ftresult, infos, access, domains, clique_of):
    nr = norm.rules[sk.norm_rule]
    out_info = infos[sk.output_ft]
    out_spec = out_info.spec

    env: dict[str, Source] = {}
    guards: list[tuple[Source, Source]] = []

    if nr.push is not None:
        in_info = infos[sk.input_ft]
        in_spec = in_info.spec
        for pos, term in enumerate(nr.push.args):
            tok = in_spec.args[pos]
            src: Source = (S_CONST, tok[1]) if tok[0] == CONST else (S_REG, in_info.slots[tok[1]])
            if term.is_const:
                want = domains.encode_term((nr.push.pred, pos), term)
                if src[0] == S_CONST:
                    if src[1] != want:
                        return None
                else:
                    guards.append((src, (S_CONST, want)))
            else:
                prev = env.get(term.name)
                if prev is None:
                    env[term.name] = src
                elif prev != src:
                    if prev[0] == S_CONST and src[0] == S_CONST:
                        if prev[1] != src[1]:
                            return None
                    else:
                        guards.append((prev, src))

    probes: list[ProbeSpec] = []
    for bi, acc in enumerate(nr.body):
        atom = acc.atom
        if acc.temp_id is not None:
            temp = norm.temps[acc.temp_id]
            key_cols, out_cols = temp.key_cols, temp.out_cols
            target = ("temp", acc.temp_id)
            is_member = False
        else:
            desc = access[(nr.index, bi)]
            key_cols, out_cols = desc.key_cols, desc.out_cols
            target = ("edb", desc.name)
            is_member = desc.kind == "set"
        keys: list[Source] = []
        for col in key_cols:
            term = atom.args[col]
            if term.is_const:
                keys.append((S_CONST, domains.encode_term((atom.pred, col), term)))
            else:
                keys.append(env[term.name])
        eq_checks: list[tuple[int, Source]] = []
        pi = len(probes)
        for oi, col in enumerate(out_cols):
            term = atom.args[col]
            prev = env.get(term.name)
            if prev is None:
                env[term.name] = (S_LOCAL, pi, oi)
            else:
                eq_checks.append((oi, prev))
        kind = "member" if is_member else ("scan" if not key_cols else "probe")
        probes.append(ProbeSpec(target, kind, tuple(keys), len(out_cols), tuple(eq_checks)))

    head_sources: list[Source] = []
    for pos, term in enumerate(nr.head.args):
        if term.is_const:
            head_sources.append((S_CONST, domains.encode_term((nr.head.pred, pos), term)))
        else:
            head_sources.append(env[term.name])

    # one source per output register, in canonical order
    dup_keys: list[Source] = []
    writes: list[tuple[int, Source]] = []
    for canon_idx, pos in enumerate(out_spec.first_positions()):
        src = head_sources[pos]
        dup_keys.append(src)
        slot = out_info.slots[canon_idx]
        if src != (S_REG, slot):
            writes.append((slot, src))

    is_recursive = (
        nr.push is not None
        and clique_of.get(nr.push.pred) == clique_of.get(nr.head.pred)
    )
    save_slots = tuple(slot for slot, _src in writes) if is_recursive else ()

    return AppSpec(
        id=app_id,
        norm_rule=nr.index,
        origin_rule=nr.origin,
        input_ft=sk.input_ft,
        output_ft=sk.output_ft,
        guards=tuple(guards),
        probes=tuple(probes),
        head_sources=tuple(head_sources),
        dup_key_sources=tuple(dup_keys),
        writes=tuple(writes),
        save_slots=save_slots,
        recursive=is_recursive,
    )


def _order_inits(norm: NormalizedProgram, apps: list[AppSpec], clique_of) -> tuple[int, ...]:
    init_apps = [a for a in apps if a.input_ft is None]
    by_origin = {a.origin_rule: a.id for a in init_apps}

    def tie_key(app: AppSpec):
        head = norm.rules[app.norm_rule].head.pred
        return (clique_of.get(head, 0), app.origin_rule)

    succ: dict[int, list[int]] = {}
    indeg: dict[int, int] = {a.id: 0 for a in init_apps}
    for before, after in norm.init_constraints:
        a, b = by_origin.get(before), by_origin.get(after)
        if a is None or b is None or a == b:
            continue
        succ.setdefault(a, []).append(b)
        indeg[b] += 1

    apps_by_id = {a.id: a for a in apps}
    ready = sorted((a for a in init_apps if indeg[a.id] == 0), key=tie_key)
    order: list[int] = []
    while ready:
        nxt = ready.pop(0)
        order.append(nxt.id)
        changed = False
        for m in succ.get(nxt.id, ()):
            indeg[m] -= 1
            if indeg[m] == 0:
                ready.append(apps_by_id[m])
                changed = True
        if changed:
            ready.sort(key=tie_key)
    if len(order) != len(init_apps):
        raise PlanError("cyclic INIT ordering constraints")
    return tuple(order)


def compile_plan(
    program: Program,
    *,
    variant: str = "pe",
    dedup_mode: str = "all",
    guard: Optional[int] = None,
    declarations: Optional[DomainDeclarations] = None,
) -> PushPlan:
    """Full pipeline: normalize, fact types, specialization, plan.

    variant 'pe' falls back to 'simple' when the fixpoint explodes
    (pe_fell_back / explosion report the event); 'pe-strict' raises
    instead, 'simple' skips partial evaluation entirely.
    """
    domains = ColumnDomains(program, declarations)
    norm = normalize_rules(program)
    explosion = None
    if variant in ("pe", "pe-strict"):
        result = compute_fact_types_pe(norm, domains, guard)
        if isinstance(result, ExplosionSignal):
            if variant == "pe-strict":
                raise PlanError(
                    f"fact types exploded: {result.fact_type_count} > guard {result.guard}"
                )
            explosion = result
            result = compute_fact_types_simple(norm)
    elif variant == "simple":
        result = compute_fact_types_simple(norm)
    else:
        raise PlanError(f"unknown plan variant {variant!r}")
    descriptors, access = specialize_edb(norm)
    plan = build_plan(norm, result, descriptors, access, domains, dedup_mode)
    plan.pe_fell_back = explosion is not None
    plan.explosion = explosion
    return plan
