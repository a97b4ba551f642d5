"""Fact-type computation, both variants.

A fact type is an IDB literal whose arguments are constants or plan
registers; derived facts exist at runtime as (fact type, register values).

* simple: one fact type per IDB predicate, one register per argument.
* pe: fixpoint of an abstract consequence operator. Constants in rule
  heads are preserved; a fresh register appears exactly where a value
  originates from an EDB (or temporary) body literal; input registers
  propagate. Types are compared up to order-preserving register renaming.
  The fixpoint aborts with ExplosionSignal once the set exceeds a guard,
  letting callers fall back to the simple variant.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Union

from ..datalog.terms import Pred
from .columns import ColumnDomains
from .normalize import NormalizedProgram

CONST = "c"
REG = "r"

ArgTok = tuple  # (CONST, encoded value) | (REG, canonical index)


@dataclass(frozen=True)
class FactTypeSpec:
    id: int
    pred: Pred
    args: tuple[ArgTok, ...]

    @property
    def n_regs(self) -> int:
        return 1 + max((a[1] for a in self.args if a[0] == REG), default=-1)

    def first_positions(self) -> tuple[int, ...]:
        """Argument position of the first occurrence of each register."""
        firsts: dict[int, int] = {}
        for pos, (kind, v) in enumerate(self.args):
            if kind == REG and v not in firsts:
                firsts[v] = pos
        return tuple(firsts[i] for i in range(len(firsts)))


@dataclass(frozen=True)
class AppSkeleton:
    norm_rule: int
    input_ft: Optional[int]
    output_ft: int


@dataclass
class FactTypeResult:
    variant: str
    types: list[FactTypeSpec]
    apps: list[AppSkeleton]


@dataclass(frozen=True)
class ExplosionSignal:
    """The PE fixpoint exceeded its guard; fall back to the simple variant."""

    fact_type_count: int
    guard: int


def default_guard(norm: NormalizedProgram) -> int:
    return 4 * max(1, len(norm.program.rules))


def compute_fact_types_simple(norm: NormalizedProgram) -> FactTypeResult:
    types: list[FactTypeSpec] = []
    by_pred: dict[Pred, int] = {}
    for nr in norm.rules:
        pred = nr.head.pred
        if pred not in by_pred:
            ft = FactTypeSpec(len(types), pred, tuple((REG, i) for i in range(pred[1])))
            by_pred[pred] = ft.id
            types.append(ft)
    apps = []
    for nr in norm.rules:
        input_ft = by_pred[nr.push.pred] if nr.push is not None else None
        apps.append(AppSkeleton(nr.index, input_ft, by_pred[nr.head.pred]))
    return FactTypeResult("simple", types, apps)


def compute_fact_types_pe(
    norm: NormalizedProgram,
    domains: ColumnDomains,
    guard: Optional[int] = None,
) -> Union[FactTypeResult, ExplosionSignal]:
    if guard is None:
        guard = default_guard(norm)

    types: list[FactTypeSpec] = []
    ids: dict[tuple, int] = {}
    by_pred: dict[Pred, list[int]] = {}
    apps: list[AppSkeleton] = []
    pending: deque[int] = deque()

    def intern(pred: Pred, args: tuple[ArgTok, ...]) -> tuple[int, bool]:
        key = (pred, args)
        ft_id = ids.get(key)
        if ft_id is not None:
            return ft_id, False
        ft_id = len(types)
        ids[key] = ft_id
        types.append(FactTypeSpec(ft_id, pred, args))
        by_pred.setdefault(pred, []).append(ft_id)
        pending.append(ft_id)
        return ft_id, True

    def derive(nr, input_spec: Optional[FactTypeSpec]) -> Optional[tuple[Pred, tuple[ArgTok, ...]]]:
        """Head type for one rule application, or None if not unifiable."""
        env: dict[str, tuple] = {}
        if nr.push is not None:
            assert input_spec is not None
            for pos, term in enumerate(nr.push.args):
                tok = input_spec.args[pos]
                if term.is_const:
                    enc = domains.encode_term((nr.push.pred, pos), term)
                    if tok[0] == CONST and tok[1] != enc:
                        return None  # constant clash, rule can never fire
                else:
                    prev = env.get(term.name)
                    if prev is None:
                        env[term.name] = ("in", tok) if tok[0] == REG else tok
                    elif prev[0] == CONST and tok[0] == CONST and prev[1] != tok[1]:
                        return None  # repeated variable forced to two constants
        for bi, acc in enumerate(nr.body):
            for term in acc.atom.args:
                if term.is_var and term.name not in env:
                    env[term.name] = ("b", bi, term.name)
        head = nr.head
        raw: list[tuple] = []
        for pos, term in enumerate(head.args):
            if term.is_const:
                raw.append((CONST, domains.encode_term((head.pred, pos), term)))
            else:
                raw.append(env[term.name])
        canon: dict[tuple, int] = {}
        args: list[ArgTok] = []
        for tok in raw:
            if tok[0] == CONST:
                args.append(tok)
            else:
                idx = canon.setdefault(tok, len(canon))
                args.append((REG, idx))
        return head.pred, tuple(args)

    for nr in norm.rules:
        if nr.push is not None:
            continue
        derived = derive(nr, None)
        if derived is None:
            continue
        out, _ = intern(*derived)
        apps.append(AppSkeleton(nr.index, None, out))
        if len(types) > guard:
            return ExplosionSignal(len(types), guard)

    push_rules: dict[Pred, list] = {}
    for nr in norm.rules:
        if nr.push is not None:
            push_rules.setdefault(nr.push.pred, []).append(nr)

    while pending:
        ft_id = pending.popleft()
        spec = types[ft_id]
        for nr in push_rules.get(spec.pred, ()):
            derived = derive(nr, spec)
            if derived is None:
                continue
            out, _ = intern(*derived)
            apps.append(AppSkeleton(nr.index, ft_id, out))
            if len(types) > guard:
                return ExplosionSignal(len(types), guard)

    return FactTypeResult("pe", types, apps)
