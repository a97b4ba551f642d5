"""Seminaive bottom-up evaluation over the same storage structures.

Cliques are evaluated in dependency order. Within a clique, rules without
same-clique IDB body literals run once; the rest are rewritten into delta
variants (each same-clique literal takes the delta role once; literals
before the delta see new totals, literals after see old totals). Each IDB
predicate keeps a total list, a duplicate-check set, and map indexes per
needed binding pattern; freshly derived tuples go to the result list and
the next delta.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional

from ..datalog.analysis import build_predicate_graph
from ..datalog.terms import Atom, Pred, Program
from ..planner.columns import ColumnDomains
from ..planner.specialize import DescriptorSet, EdbDescriptor
from ..storage.lists import ListRelation
from .runtime import AnswerRelation, ExecStats
from .store import EdbStore, build_set, ranges_for

ROLE_DELTA = "delta"
ROLE_OLD = "old"      # same-clique totals, pre-iteration view
ROLE_NEW = "new"      # same-clique totals plus current delta
ROLE_DONE = "done"    # earlier clique, complete
ROLE_EDB = "edb"


@dataclass(frozen=True)
class _Literal:
    atom: Atom
    role: str
    descriptor: Optional[EdbDescriptor] = None


@dataclass(frozen=True)
class _Variant:
    rule_idx: int
    head: Atom
    literals: tuple[_Literal, ...]  # join order: delta literal first


@dataclass
class SeminaivePlan:
    program: Program
    domains: ColumnDomains
    descriptors: list[EdbDescriptor]
    base_variants: dict[int, list[_Variant]]   # clique index -> run-once variants
    delta_variants: dict[int, list[_Variant]]  # clique index -> per-iteration variants
    cliques: tuple

    @classmethod
    def compile(cls, program: Program, domains: ColumnDomains) -> "SeminaivePlan":
        graph = build_predicate_graph(program)
        clique_of = graph.clique_index()
        dset = DescriptorSet()
        base: dict[int, list[_Variant]] = {}
        delta: dict[int, list[_Variant]] = {}

        def build_variant(ri: int, rule, delta_pos: Optional[int]) -> _Variant:
            ci = clique_of[rule.head.pred]
            order = list(range(len(rule.body)))
            if delta_pos is not None:
                order.remove(delta_pos)
                order.insert(0, delta_pos)
            bound: set[str] = set()
            lits: list[_Literal] = []
            for pos in order:
                atom = rule.body[pos]
                if atom.pred in program.idb:
                    if pos == delta_pos:
                        role = ROLE_DELTA
                    elif clique_of[atom.pred] != ci:
                        role = ROLE_DONE
                    elif pos < delta_pos:
                        role = ROLE_NEW
                    else:
                        role = ROLE_OLD
                    lits.append(_Literal(atom, role))
                else:
                    lits.append(_Literal(atom, ROLE_EDB, dset.get(atom, bound)))
                bound.update(t.name for t in atom.args if t.is_var)
            return _Variant(ri, rule.head, tuple(lits))

        for ri, rule in enumerate(program.rules):
            ci = clique_of[rule.head.pred]
            same = [
                i for i, a in enumerate(rule.body)
                if a.pred in program.idb and clique_of[a.pred] == ci
            ]
            if not same:
                base.setdefault(ci, []).append(build_variant(ri, rule, None))
            else:
                for pos in same:
                    delta.setdefault(ci, []).append(build_variant(ri, rule, pos))
        return cls(program, domains, dset.descriptors, base, delta, graph.cliques)


class _IdbRelation:
    """Total list + duplicate set + lazily maintained map indexes."""

    def __init__(self, pred: Pred, domains: ColumnDomains, set_impl: str):
        self.pred = pred
        self.rows: list[tuple] = []
        self.result = ListRelation(pred[1], name=f"{pred[0]}_ff")
        positions = [(pred, i) for i in range(pred[1])]
        self.dup = build_set(pred[1], ranges_for(domains, positions), f"{pred[0]}_bb", set_impl)
        self._indexes: dict[tuple[int, ...], dict] = {}

    def promote(self, rows: list[tuple]) -> None:
        self.rows.extend(rows)
        for positions, idx in self._indexes.items():
            for row in rows:
                key = tuple(row[p] for p in positions)
                bucket = idx.get(key)
                if bucket is None:
                    idx[key] = [row]
                else:
                    bucket.append(row)
        for row in rows:
            self.result.insert(row)

    def index(self, positions: tuple[int, ...]) -> dict:
        idx = self._indexes.get(positions)
        if idx is None:
            idx = {}
            for row in self.rows:
                key = tuple(row[p] for p in positions)
                idx.setdefault(key, []).append(row)
            self._indexes[positions] = idx
        return idx


@dataclass
class SeminaiveResult:
    stats: ExecStats
    relations: dict[Pred, list[tuple]]
    answers: AnswerRelation


def _index_rows(rows: list[tuple], positions: tuple[int, ...]) -> dict:
    idx: dict = {}
    for row in rows:
        key = tuple(row[p] for p in positions)
        bucket = idx.get(key)
        if bucket is None:
            idx[key] = [row]
        else:
            bucket.append(row)
    return idx


class _Evaluator:
    def __init__(self, plan: SeminaivePlan, store: EdbStore, set_impl: str, stats: ExecStats):
        self.plan = plan
        self.domains = plan.domains
        self.edb = store.structures
        self.stats = stats
        self.idb: dict[Pred, _IdbRelation] = {
            p: _IdbRelation(p, plan.domains, set_impl) for p in plan.program.idb
        }
        self._const_cache: dict[tuple, int] = {}

    def encode_const(self, atom: Atom, pos: int) -> int:
        key = (atom.pred, pos, atom.args[pos])
        v = self._const_cache.get(key)
        if v is None:
            v = self.domains.encode_term((atom.pred, pos), atom.args[pos])
            self._const_cache[key] = v
        return v

    def eval_variant(self, variant: _Variant, current: dict[Pred, list[tuple]],
                     delta_indexes: dict, out: list[tuple]) -> None:
        attempted = 0
        new = 0
        head = variant.head
        target = self.idb[head.pred]
        insert = target.dup.insert_if_new

        fast = self._try_fast(variant)
        if fast is not None:
            drows = current.get(variant.literals[0].atom.pred, [])
            attempted, new = fast(drows, target, out)
            self.stats.note_fact_type(head.predicate, attempted, new)
            return

        def candidates(lit: _Literal, env: dict):
            atom = lit.atom
            if lit.role == ROLE_EDB:
                desc = lit.descriptor
                structure = self.edb[desc.name]
                if desc.kind == "list":
                    for row in structure.cursor():
                        yield dict(zip(desc.retained, row))
                    return
                key = tuple(
                    env[atom.args[c].name] if atom.args[c].is_var else self.encode_const(atom, c)
                    for c in desc.key_cols
                )
                if desc.kind == "set":
                    if key in structure:
                        yield {}
                    return
                raw = structure.raw_values(key[0] if structure.key_arity == 1 else key)
                if not raw:
                    return
                if structure.value_arity == 1:
                    out_col = desc.out_cols[0]
                    for v in raw:
                        yield {out_col: v}
                else:
                    for vals in raw:
                        yield dict(zip(desc.out_cols, vals))
                return
            bound_positions = []
            key_parts = []
            for i, t in enumerate(atom.args):
                if t.is_const:
                    bound_positions.append(i)
                    key_parts.append(self.encode_const(atom, i))
                elif t.name in env:
                    bound_positions.append(i)
                    key_parts.append(env[t.name])
            positions = tuple(bound_positions)
            key = tuple(key_parts)
            sources: list[tuple] = []  # (rows | index, indexed)
            if lit.role == ROLE_DELTA:
                drows = current.get(atom.pred, [])
                if positions:
                    ck = (atom.pred, positions)
                    di = delta_indexes.get(ck)
                    if di is None:
                        di = delta_indexes[ck] = _index_rows(drows, positions)
                    sources.append((di, True))
                else:
                    sources.append((drows, False))
            else:
                rel = self.idb[atom.pred]
                if positions:
                    sources.append((rel.index(positions), True))
                else:
                    sources.append((rel.rows, False))
                if lit.role == ROLE_NEW:
                    drows = current.get(atom.pred, [])
                    if positions:
                        ck = (atom.pred, positions)
                        di = delta_indexes.get(ck)
                        if di is None:
                            di = delta_indexes[ck] = _index_rows(drows, positions)
                        sources.append((di, True))
                    else:
                        sources.append((drows, False))
            for rows_or_idx, indexed in sources:
                rows = rows_or_idx.get(key, ()) if indexed else rows_or_idx
                for row in rows:
                    yield {i: row[i] for i in range(len(row))}

        head_terms = head.args

        def walk(li: int, env: dict):
            nonlocal attempted, new
            if li == len(variant.literals):
                attempted += 1
                row = tuple(
                    env[t.name] if t.is_var else self.encode_const(head, i)
                    for i, t in enumerate(head_terms)
                )
                if insert(row):
                    new += 1
                    out.append(row)
                return
            lit = variant.literals[li]
            atom = lit.atom
            for col_vals in candidates(lit, env):
                env2 = env
                ok = True
                for col, value in col_vals.items():
                    t = atom.args[col]
                    if not t.is_var:
                        continue
                    existing = env2.get(t.name)
                    if existing is None:
                        if env2 is env:
                            env2 = dict(env)
                        env2[t.name] = value
                    elif existing != value:
                        ok = False
                        break
                if ok:
                    walk(li + 1, env2)

        walk(0, {})
        self.stats.note_fact_type(head.predicate, attempted, new)

    def _try_fast(self, variant: _Variant) -> Optional[Callable]:
        """Tight loop for delta + one single-key/single-value map probe."""
        if len(variant.literals) != 2:
            return None
        first, second = variant.literals
        if first.role != ROLE_DELTA or second.role != ROLE_EDB:
            return None
        desc = second.descriptor
        if desc is None or desc.kind != "map" or len(desc.key_cols) != 1 or len(desc.out_cols) != 1:
            return None
        structure = self.edb[desc.name]
        if structure.value_arity != 1 or structure.key_arity != 1:
            return None
        datom, satom = first.atom, second.atom
        dvars = [t.name for t in datom.args]
        if not all(t.is_var for t in datom.args) or len(set(dvars)) != len(dvars):
            return None
        key_term = satom.args[desc.key_cols[0]]
        out_term = satom.args[desc.out_cols[0]]
        if not (key_term.is_var and key_term.name in dvars):
            return None
        if not out_term.is_var or out_term.name in dvars:
            return None
        key_pos = dvars.index(key_term.name)
        head_sources: list[tuple] = []
        for t in variant.head.args:
            if t.is_var and t.name in dvars:
                head_sources.append(("d", dvars.index(t.name)))
            elif t.is_var and t.name == out_term.name:
                head_sources.append(("x",))
            else:
                return None

        dup = self.idb[variant.head.pred].dup
        from ..storage.sets import BitmapSet

        if (isinstance(dup, BitmapSet) and len(head_sources) == 2
                and head_sources.count(("x",)) == 1):
            lead_lo = dup._ranges[0][0]
            last_lo = dup._last_lo
            x_first = head_sources[0] == ("x",)
            d_idx = head_sources[1][1] if x_first else head_sources[0][1]

            def run(delta_rows: list[tuple], target: _IdbRelation, out: list[tuple]):
                attempted = 0
                new = 0
                raw_values = structure.raw_values
                append = out.append
                rows_arr = dup._rows
                row_bytes = dup._row_bytes
                if x_first:
                    # bitmap row varies with the cursor, bit fixed per delta row
                    for drow in delta_rows:
                        vals = raw_values(drow[key_pos])
                        if not vals:
                            continue
                        attempted += len(vals)
                        d = drow[d_idx]
                        bit = d - last_lo
                        byte_i, mask = bit >> 3, 1 << (bit & 7)
                        for x in vals:
                            r = x - lead_lo
                            ba = rows_arr[r]
                            if ba is None:
                                ba = rows_arr[r] = bytearray(row_bytes)
                            b = ba[byte_i]
                            if b & mask:
                                continue
                            ba[byte_i] = b | mask
                            new += 1
                            append((x, d))
                else:
                    for drow in delta_rows:
                        vals = raw_values(drow[key_pos])
                        if not vals:
                            continue
                        attempted += len(vals)
                        d = drow[d_idx]
                        r = d - lead_lo
                        ba = rows_arr[r]
                        if ba is None:
                            ba = rows_arr[r] = bytearray(row_bytes)
                        for x in vals:
                            bit = x - last_lo
                            byte_i = bit >> 3
                            b = ba[byte_i]
                            mask = 1 << (bit & 7)
                            if b & mask:
                                continue
                            ba[byte_i] = b | mask
                            new += 1
                            append((d, x))
                dup.element_count += new
                return attempted, new

            return run

        def run(delta_rows: list[tuple], target: _IdbRelation, out: list[tuple]):
            attempted = 0
            new = 0
            raw_values = structure.raw_values
            insert = target.dup.insert_if_new
            append = out.append
            srcs = head_sources
            for drow in delta_rows:
                vals = raw_values(drow[key_pos])
                if not vals:
                    continue
                attempted += len(vals)
                for x in vals:
                    row = tuple(x if s[0] == "x" else drow[s[1]] for s in srcs)
                    if insert(row):
                        new += 1
                        append(row)
            return attempted, new

        return run


def execute_seminaive(
    plan: SeminaivePlan,
    store: EdbStore,
    *,
    set_impl: str = "auto",
    count_only: bool = False,
) -> SeminaiveResult:
    program, domains = plan.program, plan.domains
    stats = ExecStats(engine="seminaive")
    t0 = time.perf_counter()
    ev = _Evaluator(plan, store, set_impl, stats)

    for ci in range(len(plan.cliques)):
        current: dict[Pred, list[tuple]] = {}
        for variant in plan.base_variants.get(ci, ()):
            out: list[tuple] = []
            ev.eval_variant(variant, {}, {}, out)
            if out:
                current.setdefault(variant.head.pred, []).extend(out)
        variants = plan.delta_variants.get(ci, ())
        while current:
            next_delta: dict[Pred, list[tuple]] = {}
            delta_indexes: dict = {}
            for variant in variants:
                if not current.get(variant.literals[0].atom.pred):
                    continue
                out = []
                ev.eval_variant(variant, current, delta_indexes, out)
                if out:
                    next_delta.setdefault(variant.head.pred, []).extend(out)
            for pred, rows in current.items():
                ev.idb[pred].promote(rows)
            current = next_delta

    answers = AnswerRelation(
        program.answer_pred, program.answer_pred[1] if program.answer_pred else 0,
        domains, materialized=not count_only,
    )
    if program.answer_pred is not None:
        rel = ev.idb.get(program.answer_pred)
        if rel is not None:
            answers.count = len(rel.rows)
            stats.answers_produced = len(rel.rows)
            if not count_only:
                for row in rel.rows:
                    answers._list.insert(row)
    stats.durations["execute"] = time.perf_counter() - t0
    return SeminaiveResult(
        stats=stats,
        relations={p: ev.idb[p].rows for p in program.idb},
        answers=answers,
    )
