"""Push-method plan interpreter.

A derived fact is a plan position plus register values. Deriving a fact
transfers control to the first consuming rule application directly; the
remaining consumers and the producer's own continuation go on an explicit
backtrack stack. Register values a recursive application overwrites are
saved on a value stack and restored exactly when the owning frame resumes.

Rule applications run as Python generators: the generator object is the
frame (START = first next, CONT = each later next), its locals hold the
cursor state, and the yield value is the consumer list for the fact just
derived. A trampoline loop drives everything, so recursion depth never
touches the Python stack.

Inner loops are specialized at bind time for the hot shapes (single map
probe / single list scan with bitmap or dynamic-hash duplicate checks);
everything else runs on a generic nested-cursor machine.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterator, Optional

from ..errors import PlanError, StorageError
from ..planner.columns import ColumnDomains
from ..planner.plan import AppSpec, PushPlan, S_CONST, S_LOCAL, S_REG
from ..storage.lists import ListRelation
from ..storage.maps import MapRelation
from ..storage.memory import MemoryReport, StructureRegistry
from ..storage.sets import BitmapSet, DynamicHashSet
from .store import EdbStore, build_set, ranges_for

_MIX = 0x9E3779B97F4A7C15
_U64 = (1 << 64) - 1


@dataclass
class ExecStats:
    engine: str = "push"
    derivations_attempted: int = 0
    facts_pushed: int = 0
    duplicates_rejected: int = 0
    answers_produced: int = 0
    bt_pushed: int = 0
    bt_popped: int = 0
    values_saved: int = 0
    values_restored: int = 0
    truncated: bool = False
    per_fact_type: dict[str, tuple[int, int]] = field(default_factory=dict)
    durations: dict[str, float] = field(default_factory=dict)

    def note_fact_type(self, name: str, attempted: int, new: int) -> None:
        a, n = self.per_fact_type.get(name, (0, 0))
        self.per_fact_type[name] = (a + attempted, n + new)
        self.derivations_attempted += attempted
        self.facts_pushed += new
        self.duplicates_rejected += attempted - new


class AnswerRelation:
    """Materialized answers plus decoding back to terms."""

    def __init__(self, pred, arity: int, domains: ColumnDomains, materialized: bool):
        self.pred = pred
        self.arity = arity
        self.count = 0
        self.materialized = materialized
        self._domains = domains
        self._list = ListRelation(arity, name=(f"{pred[0]}_ff" if pred else "answer_ff"))

    def cursor(self) -> Iterator[tuple[int, ...]]:
        """Distinct answers in derivation order (encoded column values)."""
        return self._list.cursor()

    def decoded(self) -> Iterator[tuple]:
        dom, pred = self._domains, self.pred
        for row in self._list.cursor():
            yield tuple(dom.decode_value((pred, i), v).name
                        if dom.decode_value((pred, i), v).kind == "sym"
                        else dom.decode_value((pred, i), v).value
                        for i, v in enumerate(row))

    def decoded_terms(self) -> Iterator[tuple]:
        dom, pred = self._domains, self.pred
        for row in self._list.cursor():
            yield tuple(dom.decode_value((pred, i), v) for i, v in enumerate(row))

    @property
    def row_count(self) -> int:
        return self._list.row_count

    def memory_bytes(self) -> int:
        return self._list.memory_bytes()


def open_answers(result: "ExecResult") -> Iterator[tuple[int, ...]]:
    return result.answers.cursor()


@dataclass
class ExecResult:
    stats: ExecStats
    answers: AnswerRelation
    db: "Database"


class Database:
    """Structures for one execution: EDB relations, temps, duplicate sets.

    Built from a plan; the loader fills the EDB side; execute() populates
    the rest. One execution per instance.
    """

    def __init__(self, plan: PushPlan, set_impl: str = "auto", fixed_buckets: int = 1 << 20):
        self.plan = plan
        self.domains = plan.domains
        self.set_impl = set_impl
        self.fixed_buckets = fixed_buckets
        self.executed = False

        self.store = EdbStore(plan.descriptors, plan.domains, set_impl, fixed_buckets)
        self.edb = self.store.structures

        self.temps: list[object] = [self._make_temp(t) for t in plan.temps]
        self.dup_sets: list[object | None] = [
            self._make_dup_set(info) if info.dup else None for info in plan.fact_types
        ]

        ans = plan.answer
        self.answer_dup = None
        if ans.pred is not None and not ans.ride_ft_dup:
            ranges = ranges_for(self.domains, [(ans.pred, i) for i in range(ans.arity)])
            self.answer_dup = build_set(
                ans.arity, ranges, f"{ans.pred[0]}_answer_bb", set_impl, fixed_buckets
            )
        self._flat_cache: dict[str, list] = {}

    def _make_set(self, arity: int, ranges, name: str):
        return build_set(arity, ranges, name, self.set_impl, self.fixed_buckets)

    def _make_temp(self, temp):
        if "b" not in temp.pattern:
            return ListRelation(temp.source[1], name=temp.name)
        dense = None
        if len(temp.key_cols) == 1:
            dense = self.domains.int_range((temp.source, temp.key_cols[0]))
        return MapRelation(
            len(temp.key_cols), len(temp.out_cols), name=temp.name, dense_key_range=dense
        )

    def _make_dup_set(self, info):
        name = f"{info.spec.pred[0]}_bb"
        if any(i.spec.pred == info.spec.pred and i.spec.id != info.spec.id
               for i in self.plan.fact_types):
            name = f"{name}_f{info.spec.id}"
        arity = len(info.slots)
        return self._make_set(arity, ranges_for(self.domains, info.slot_positions), name)

    def flat_rows(self, desc_name: str) -> list:
        """Flattened row list for an EDB list relation (bind-time cache)."""
        rows = self._flat_cache.get(desc_name)
        if rows is None:
            rel = self.edb[desc_name]
            pages, limit = rel.pages_snapshot()
            rows = [row for page in pages for row in page][:limit]
            self._flat_cache[desc_name] = rows
        return rows

    def memory_report(self) -> MemoryReport:
        reg = StructureRegistry()
        for table in self.domains.tables():
            reg.register(table.name, table)
        for desc in self.plan.descriptors:
            reg.register(desc.name, self.edb[desc.name])
        for temp, structure in zip(self.plan.temps, self.temps):
            reg.register(temp.name, structure)
        for info, s in zip(self.plan.fact_types, self.dup_sets):
            if s is not None:
                reg.register(s.name, s)
        if self.answer_dup is not None:
            reg.register(self.answer_dup.name, self.answer_dup)
        return reg.report()


class _Truncated(Exception):
    pass


class _Runtime:
    """One execution: bound structures, registers, stacks, counters."""

    def __init__(self, plan: PushPlan, db: Database, *, dedup: bool, count_only: bool,
                 derivation_limit: Optional[int]):
        self.plan = plan
        self.db = db
        self.dedup = dedup
        self.count_only = count_only
        self.limit = derivation_limit
        self.regs = [0] * plan.register_count
        self.save_stack: list = []
        self.answer_dup = db.answer_dup if dedup else None
        self.stats = ExecStats(engine=f"push-{plan.variant}")
        self.answers = AnswerRelation(
            plan.answer.pred, plan.answer.arity, plan.domains,
            materialized=not count_only,
        )
        self.answer_ft_ids = set(plan.answer.ft_ids)
        # fill targets per fact type: (structure, key_cols, out_cols, is_list)
        self.fill_specs: list[list] = []
        for ft_id, temp_ids in enumerate(plan.fills):
            specs = []
            for tid in temp_ids:
                temp = plan.temps[tid]
                specs.append((db.temps[tid], temp.key_cols, temp.out_cols, "b" not in temp.pattern))
            self.fill_specs.append(specs)
        self.factories: list = [None] * len(plan.apps)
        self.consumer_factories: list = [()] * len(plan.fact_types)
        for app in plan.apps:
            self.factories[app.id] = self._build_factory(app)
        for ft_id, cons in enumerate(plan.consumers):
            self.consumer_factories[ft_id] = tuple(self.factories[a] for a in cons)

    # -- source helpers ----------------------------------------------------

    def _fixed_value(self, src):
        if src[0] == S_CONST:
            return src[1]
        if src[0] == S_REG:
            return self.regs[src[1]]
        raise PlanError("source not available before probing")

    def _build_factory(self, app: AppSpec):
        consumers = self.consumer_factories  # looked up lazily via ft id
        fast = self._try_fast_factory(app)
        if fast is not None:
            return fast
        return self._generic_factory(app)

    # -- materialization ---------------------------------------------------

    def _materialize(self, app: AppSpec):
        """(fills, answer_append, answer_dup) actions for one app's output."""
        ft_id = app.output_ft
        fills = self.fill_specs[ft_id]
        is_answer = ft_id in self.answer_ft_ids
        return fills, is_answer

    def _emit(self, app, values: tuple, fills, is_answer) -> bool:
        """Record one new fact; returns False when an answer duplicate.

        `values` holds the full output-argument tuple. Fills run before any
        consumer does (derivation-time fill policy).
        """
        for structure, key_cols, out_cols, is_list in fills:
            if is_list:
                structure.insert(values)
            else:
                structure.insert(
                    tuple(values[c] for c in key_cols),
                    tuple(values[c] for c in out_cols),
                )
        if is_answer:
            st = self.stats
            if self.answer_dup is not None:
                if not self.answer_dup.insert_if_new(values):
                    return True
            st.answers_produced += 1
            if self.limit is not None and st.answers_produced >= self.limit:
                if not self.count_only:
                    self.answers._list.insert(values)
                    self.answers.count += 1
                raise _Truncated()
            if not self.count_only:
                self.answers._list.insert(values)
                self.answers.count += 1
        return True

    # -- generic nested-cursor machine --------------------------------------

    def _generic_factory(self, app: AppSpec):
        plan, db, regs = self.plan, self.db, self.regs
        probes = app.probes
        n_levels = len(probes)
        fills, is_answer = self._materialize(app)
        info = self.plan.fact_types[app.output_ft]
        dup_set = self.db.dup_sets[app.output_ft] if self.dedup else None
        save_slots = app.save_slots
        save_stack = self.save_stack
        stats = self.stats
        head_sources = app.head_sources
        dup_sources = app.dup_key_sources
        writes = app.writes
        ft_name = info.name
        emit = self._emit
        consumer_lists = self.consumer_factories
        out_ft = app.output_ft

        # pre-resolve probe targets; temp structures mutate during execution,
        # so their value lists are sliced for snapshot semantics
        targets = []
        mutable = []
        for p in probes:
            if p.target[0] == "edb":
                targets.append(db.edb[p.target[1]])
                mutable.append(False)
            else:
                targets.append(db.temps[p.target[1]])
                mutable.append(True)

        def value_of(src, rows):
            k = src[0]
            if k == S_REG:
                return regs[src[1]]
            if k == S_CONST:
                return src[1]
            return rows[src[1]][src[2]]

        def open_level(li, rows):
            p = probes[li]
            target = targets[li]
            if p.kind == "scan":
                if isinstance(target, ListRelation):
                    _pages, limit = target.pages_snapshot()
                    return target._snapshot_iter(limit)
                raise PlanError("scan over non-list structure")
            key_parts = [value_of(s, rows) for s in p.key_sources]
            if p.kind == "member":
                return iter(((),)) if tuple(key_parts) in target else iter(())
            raw = target.raw_values(key_parts[0] if target.key_arity == 1 else tuple(key_parts))
            if not raw:
                return iter(())
            if mutable[li]:
                raw = raw[: len(raw)]
            return iter(raw)

        def runner():
            attempted = 0
            new = 0
            try:
                for a, b in app.guards:
                    if value_of(a, None) != value_of(b, None):
                        return
                rows: list = [None] * max(1, n_levels)
                if n_levels == 0:
                    attempted += 1
                    values = tuple(value_of(s, rows) for s in head_sources)
                    ok = True
                    if dup_set is not None:
                        key = tuple(value_of(s, rows) for s in dup_sources)
                        ok = dup_set.insert_if_new(key)
                    if ok:
                        new += 1
                        emit(app, values, fills, is_answer)
                        cons = consumer_lists[out_ft]
                        if cons:
                            if save_slots:
                                for s in save_slots:
                                    save_stack.append((s, regs[s]))
                                stats.values_saved += len(save_slots)
                            for slot, src in writes:
                                regs[slot] = value_of(src, rows)
                            yield cons
                            if save_slots:
                                for _ in save_slots:
                                    s, v = save_stack.pop()
                                    regs[s] = v
                                stats.values_restored += len(save_slots)
                    return
                iters: list = [None] * n_levels
                level = 0
                iters[0] = open_level(0, rows)
                while level >= 0:
                    row = next(iters[level], None)
                    if row is None:
                        level -= 1
                        continue
                    if not isinstance(row, tuple):
                        row = (row,)
                    rows[level] = row
                    p = probes[level]
                    ok = True
                    for oi, src in p.eq_checks:
                        if row[oi] != value_of(src, rows):
                            ok = False
                            break
                    if not ok:
                        continue
                    if level + 1 < n_levels:
                        level += 1
                        iters[level] = open_level(level, rows)
                        continue
                    attempted += 1
                    values = tuple(value_of(s, rows) for s in head_sources)
                    if dup_set is not None:
                        key = tuple(value_of(s, rows) for s in dup_sources)
                        if not dup_set.insert_if_new(key):
                            continue
                    new += 1
                    emit(app, values, fills, is_answer)
                    cons = consumer_lists[out_ft]
                    if cons:
                        if save_slots:
                            for s in save_slots:
                                save_stack.append((s, regs[s]))
                            stats.values_saved += len(save_slots)
                        for slot, src in writes:
                            regs[slot] = value_of(src, rows)
                        yield cons
                        if save_slots:
                            for _ in save_slots:
                                s, v = save_stack.pop()
                                regs[s] = v
                            stats.values_restored += len(save_slots)
            finally:
                stats.note_fact_type(ft_name, attempted, new)

        return runner

    # -- fast single-probe paths --------------------------------------------

    def _try_fast_factory(self, app: AppSpec):
        """Tight loop for one map-probe with int values, no eq checks.

        Covers the hot benchmark applications (transitive closure's
        recursive rule, join1's answer rule). Duplicate checks inline the
        bitmap or dynamic-hash structure; everything else falls back.
        """
        if len(app.probes) != 1 or app.guards or app.probes[0].eq_checks:
            return None
        probe = app.probes[0]
        if probe.kind != "probe" or probe.out_arity != 1:
            return None
        target = (self.db.edb[probe.target[1]] if probe.target[0] == "edb"
                  else self.db.temps[probe.target[1]])
        if not isinstance(target, MapRelation) or target.value_arity != 1:
            return None
        # classify head sources: exactly the cursor value varies
        cursor_src = (S_LOCAL, 0, 0)
        if any(s[0] == S_LOCAL and s != cursor_src for s in app.head_sources):
            return None
        temp_mutated = probe.target[0] == "temp"

        info = self.plan.fact_types[app.output_ft]
        dup_set = self.db.dup_sets[app.output_ft] if self.dedup else None
        fills, is_answer = self._materialize(app)
        if isinstance(dup_set, BitmapSet):
            mode = "bitmap"
        elif isinstance(dup_set, DynamicHashSet):
            mode = "dynhash"
        elif dup_set is None:
            mode = "none"
        else:
            mode = "generic"

        plan = self.plan
        regs = self.regs
        stats = self.stats
        save_stack = self.save_stack
        emit = self._emit
        consumer_lists = self.consumer_factories
        out_ft = app.output_ft
        ft_name = info.name
        save_slots = app.save_slots
        writes = app.writes
        head_sources = app.head_sources
        dup_sources = app.dup_key_sources
        key_sources = probe.key_sources
        key_arity1 = target.key_arity == 1

        def fixed(src):
            return regs[src[1]] if src[0] == S_REG else src[1]

        def head_template():
            # list with None at the cursor position(s)
            return [None if s == cursor_src else fixed(s) for s in head_sources], [
                i for i, s in enumerate(head_sources) if s == cursor_src
            ]

        if mode == "bitmap":
            # affine duplicate-check address: row = x*mr + cr, bit = x*mb + cb
            strides = dup_set._row_strides + (0,) * 0
            lead_ranges = dup_set._ranges[:-1]
            last_lo = dup_set._last_lo

            def make_affine():
                mr = cr = mb = cb = 0
                for si, src in enumerate(dup_sources):
                    if si < len(lead_ranges):
                        lo = lead_ranges[si][0]
                        stride = dup_set._row_strides[si]
                        if src == cursor_src:
                            mr += stride
                            cr -= lo * stride
                        else:
                            cr += (fixed(src) - lo) * stride
                    else:
                        if src == cursor_src:
                            mb += 1
                            cb -= last_lo
                        else:
                            cb += fixed(src) - last_lo
                return mr, cr, mb, cb

            def runner():
                attempted = 0
                new = 0
                try:
                    key = fixed(key_sources[0]) if key_arity1 else tuple(
                        fixed(s) for s in key_sources
                    )
                    vals = target.raw_values(key)
                    if not vals:
                        return
                    if temp_mutated:
                        vals = vals[: len(vals)]
                    attempted = len(vals)
                    mr, cr, mb, cb = make_affine()
                    rows_arr = dup_set._rows
                    row_bytes = dup_set._row_bytes
                    tmpl, cursor_positions = head_template()
                    cons = consumer_lists[out_ft]
                    if mb == 0:
                        bit = cb
                        byte_i, mask = bit >> 3, 1 << (bit & 7)
                        if mr == 0:
                            r = cr
                            ba = rows_arr[r]
                            if ba is None:
                                ba = rows_arr[r] = bytearray(row_bytes)
                            for x in vals:
                                b = ba[byte_i]
                                if b & mask:
                                    continue
                                ba[byte_i] = b | mask
                                new += 1
                                dup_set.element_count += 1
                                for i in cursor_positions:
                                    tmpl[i] = x
                                emit(app, tuple(tmpl), fills, is_answer)
                                if cons:
                                    if save_slots:
                                        for s in save_slots:
                                            save_stack.append((s, regs[s]))
                                        stats.values_saved += len(save_slots)
                                    for slot, src in writes:
                                        regs[slot] = x if src == cursor_src else fixed(src)
                                    yield cons
                                    if save_slots:
                                        for _ in save_slots:
                                            s, v = save_stack.pop()
                                            regs[s] = v
                                        stats.values_restored += len(save_slots)
                        else:
                            for x in vals:
                                r = x * mr + cr
                                ba = rows_arr[r]
                                if ba is None:
                                    ba = rows_arr[r] = bytearray(row_bytes)
                                b = ba[byte_i]
                                if b & mask:
                                    continue
                                ba[byte_i] = b | mask
                                new += 1
                                dup_set.element_count += 1
                                for i in cursor_positions:
                                    tmpl[i] = x
                                emit(app, tuple(tmpl), fills, is_answer)
                                if cons:
                                    if save_slots:
                                        for s in save_slots:
                                            save_stack.append((s, regs[s]))
                                        stats.values_saved += len(save_slots)
                                    for slot, src in writes:
                                        regs[slot] = x if src == cursor_src else fixed(src)
                                    yield cons
                                    if save_slots:
                                        for _ in save_slots:
                                            s, v = save_stack.pop()
                                            regs[s] = v
                                        stats.values_restored += len(save_slots)
                    else:
                        for x in vals:
                            r = x * mr + cr
                            bit = x * mb + cb
                            ba = rows_arr[r]
                            if ba is None:
                                ba = rows_arr[r] = bytearray(row_bytes)
                            byte_i, mask = bit >> 3, 1 << (bit & 7)
                            b = ba[byte_i]
                            if b & mask:
                                continue
                            ba[byte_i] = b | mask
                            new += 1
                            dup_set.element_count += 1
                            for i in cursor_positions:
                                tmpl[i] = x
                            emit(app, tuple(tmpl), fills, is_answer)
                            cons2 = consumer_lists[out_ft]
                            if cons2:
                                if save_slots:
                                    for s in save_slots:
                                        save_stack.append((s, regs[s]))
                                    stats.values_saved += len(save_slots)
                                for slot, src in writes:
                                    regs[slot] = x if src == cursor_src else fixed(src)
                                yield cons2
                                if save_slots:
                                    for _ in save_slots:
                                        s, v = save_stack.pop()
                                        regs[s] = v
                                    stats.values_restored += len(save_slots)
                finally:
                    stats.note_fact_type(ft_name, attempted, new)

            return runner

        if mode == "dynhash":
            offsets = dup_set._offsets

            def make_affine_pack():
                # packed key = x*mult + add (cursor value is the only varying part)
                add = 1
                for src, off in zip(dup_sources, offsets):
                    add <<= 32
                    if src != cursor_src:
                        add += fixed(src) + off
                mult = 0
                shift = 1
                for src, off in zip(reversed(dup_sources), reversed(offsets)):
                    if src == cursor_src:
                        mult += shift
                        add += off * shift
                    shift <<= 32
                return mult, add

            def runner():
                attempted = 0
                new = 0
                try:
                    key = fixed(key_sources[0]) if key_arity1 else tuple(
                        fixed(s) for s in key_sources
                    )
                    vals = target.raw_values(key)
                    if not vals:
                        return
                    if temp_mutated:
                        vals = vals[: len(vals)]
                    attempted = len(vals)
                    mult, add = make_affine_pack()
                    tmpl, cursor_positions = head_template()
                    cons = consumer_lists[out_ft]
                    table = dup_set._table
                    mask = dup_set._mask
                    count = dup_set.element_count
                    threshold = dup_set._threshold
                    for x in vals:
                        k = x * mult + add
                        h = ((k * _MIX) & _U64) >> 32 & mask
                        while True:
                            cur = table[h]
                            if cur < 0:
                                table[h] = k
                                count += 1
                                break
                            if cur == k:
                                k = None
                                break
                            h = (h + 1) & mask
                        if k is None:
                            continue
                        new += 1
                        dup_set.element_count = count
                        if count > threshold:
                            dup_set._grow()
                            table = dup_set._table
                            mask = dup_set._mask
                            threshold = dup_set._threshold
                        for i in cursor_positions:
                            tmpl[i] = x
                        emit(app, tuple(tmpl), fills, is_answer)
                        if cons:
                            if save_slots:
                                for s in save_slots:
                                    save_stack.append((s, regs[s]))
                                stats.values_saved += len(save_slots)
                            for slot, src in writes:
                                regs[slot] = x if src == cursor_src else fixed(src)
                            yield cons
                            if save_slots:
                                for _ in save_slots:
                                    s, v = save_stack.pop()
                                    regs[s] = v
                                stats.values_restored += len(save_slots)
                            table = dup_set._table
                            mask = dup_set._mask
                            count = dup_set.element_count
                            threshold = dup_set._threshold
                finally:
                    stats.note_fact_type(ft_name, attempted, new)

            return runner

        if mode == "none":
            limit = self.limit
            count_only = self.count_only

            def runner():
                attempted = 0
                try:
                    key = fixed(key_sources[0]) if key_arity1 else tuple(
                        fixed(s) for s in key_sources
                    )
                    vals = target.raw_values(key)
                    if not vals:
                        return
                    if temp_mutated:
                        vals = vals[: len(vals)]
                    tmpl, cursor_positions = head_template()
                    cons = consumer_lists[out_ft]
                    if (not cons and not fills and is_answer and count_only
                            and self.answer_dup is None):
                        # pure counting loop
                        st = self.stats
                        if limit is None:
                            attempted = len(vals)
                            st.answers_produced += attempted
                            return
                        for _x in vals:
                            attempted += 1
                            st.answers_produced += 1
                            if st.answers_produced >= limit:
                                raise _Truncated()
                        return
                    for x in vals:
                        attempted += 1
                        for i in cursor_positions:
                            tmpl[i] = x
                        emit(app, tuple(tmpl), fills, is_answer)
                        if cons:
                            if save_slots:
                                for s in save_slots:
                                    save_stack.append((s, regs[s]))
                                stats.values_saved += len(save_slots)
                            for slot, src in writes:
                                regs[slot] = x if src == cursor_src else fixed(src)
                            yield cons
                            if save_slots:
                                for _ in save_slots:
                                    s, v = save_stack.pop()
                                    regs[s] = v
                                stats.values_restored += len(save_slots)
                finally:
                    stats.note_fact_type(ft_name, attempted, attempted)

            return runner

        return None  # generic dup structures take the generic path

    # -- driver --------------------------------------------------------------

    def run(self) -> None:
        stats = self.stats
        stack: list = []
        pushes = pops = 0
        try:
            for app_id in self.plan.init_order:
                cur = self.factories[app_id]()
                while True:
                    out = next(cur, None)
                    if out is None:
                        if not stack:
                            break
                        cur = stack.pop()
                        pops += 1
                        continue
                    stack.append(cur)
                    pushes += 1
                    n = len(out)
                    if n > 1:
                        for i in range(n - 1, 0, -1):
                            stack.append(out[i]())
                            pushes += 1
                    cur = out[0]()
        except _Truncated:
            stats.truncated = True
            for frame in stack:
                frame.close()
            stack.clear()
            while self.save_stack:
                slot, v = self.save_stack.pop()
                self.regs[slot] = v
                stats.values_restored += 1
        finally:
            stats.bt_pushed += pushes
            stats.bt_popped += pops
        assert not stack
        self.backtrack_empty = not stack
        self.save_stack_empty = not self.save_stack


def execute(plan: PushPlan, db: Database, *, count_only: bool = False) -> ExecResult:
    """Run a plan to completion; answers carry set semantics."""
    if db.executed:
        raise PlanError("database already executed; build a fresh one")
    db.executed = True
    rt = _Runtime(plan, db, dedup=True, count_only=count_only, derivation_limit=None)
    t0 = time.perf_counter()
    rt.run()
    rt.stats.durations["execute"] = time.perf_counter() - t0
    if rt.answers.materialized:
        assert rt.answers.count == rt.stats.answers_produced
    return ExecResult(stats=rt.stats, answers=rt.answers, db=db)


def execute_nodedup(plan: PushPlan, db: Database, derivation_limit: Optional[int] = None):
    """Count answer derivations without duplicate elimination.

    Recursive plans require a finite derivation_limit (nothing else stops
    them). Returns (count, truncated, stats).
    """
    if db.executed:
        raise PlanError("database already executed; build a fresh one")
    if derivation_limit is None:
        recursive = any(a.recursive for a in plan.apps)
        if recursive:
            raise PlanError("recursive plan: execute_nodedup needs a finite derivation_limit")
    db.executed = True
    rt = _Runtime(plan, db, dedup=False, count_only=True, derivation_limit=derivation_limit)
    t0 = time.perf_counter()
    rt.run()
    rt.stats.durations["execute"] = time.perf_counter() - t0
    return rt.stats.answers_produced, rt.stats.truncated, rt.stats
