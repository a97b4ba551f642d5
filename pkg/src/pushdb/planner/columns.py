"""Column domain analysis.

Columns that are never joined get separate string tables (keeps ids dense
per domain); joined columns share one. A column group backed by declared
integer ranges (generator sidecars, CLI flag) stores integers directly and
becomes eligible for bitmap sets and flexible-array maps.

Symbolic groups intern a kind-tagged key ("s" + text for symbols,
"i" + digits for integer constants) so 55 and '55' never collide.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..datalog.terms import INT, SYM, Atom, Int, Pred, Program, Sym, Term
from ..errors import PlanError
from ..storage.strings import StringTable

Position = tuple[Pred, int]  # (predicate, argument index)


@dataclass
class DomainDeclarations:
    """Declared dense integer ranges per predicate column."""

    ranges: dict[str, list[Optional[tuple[int, int]]]] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "DomainDeclarations":
        ranges = {}
        for name, cols in data.items():
            ranges[name] = [tuple(c) if c is not None else None for c in cols]
        return cls(ranges)

    def to_dict(self) -> dict:
        return {name: [list(c) if c else None for c in cols] for name, cols in self.ranges.items()}

    def merge(self, other: "DomainDeclarations") -> None:
        self.ranges.update(other.ranges)

    def range_for(self, pos: Position) -> Optional[tuple[int, int]]:
        pred, col = pos
        cols = self.ranges.get(pred[0])
        if cols is None or len(cols) != pred[1]:
            return None
        return cols[col]


class ColumnDomains:
    """Union-find over predicate columns plus per-group value codecs."""

    def __init__(self, program: Program, declarations: DomainDeclarations | None = None):
        self.program = program
        self.declarations = declarations or DomainDeclarations()
        self._parent: dict[Position, Position] = {}
        self._build(program)
        self._groups: dict[Position, list[Position]] = {}
        for pos in self._parent:
            self._groups.setdefault(self._find(pos), []).append(pos)
        self._int_range: dict[Position, Optional[tuple[int, int]]] = {}
        self._tables: dict[Position, StringTable] = {}
        for root, members in self._groups.items():
            hull = None
            for m in members:
                r = self.declarations.range_for(m)
                if r is not None:
                    hull = r if hull is None else (min(hull[0], r[0]), max(hull[1], r[1]))
            self._int_range[root] = hull

    # -- union-find ----------------------------------------------------

    def _add(self, pos: Position) -> None:
        if pos not in self._parent:
            self._parent[pos] = pos

    def _find(self, pos: Position) -> Position:
        parent = self._parent
        root = pos
        while parent[root] != root:
            root = parent[root]
        while parent[pos] != root:
            parent[pos], pos = root, parent[pos]
        return root

    def _union(self, a: Position, b: Position) -> None:
        ra, rb = self._find(a), self._find(b)
        if ra != rb:
            self._parent[rb] = ra

    def _build(self, program: Program) -> None:
        def note_atom(atom: Atom, var_positions: dict[str, Position]):
            for i, t in enumerate(atom.args):
                pos = (atom.pred, i)
                self._add(pos)
                if t.is_var:
                    first = var_positions.get(t.name)
                    if first is None:
                        var_positions[t.name] = pos
                    else:
                        self._union(first, pos)

        for rule in program.rules:
            var_positions: dict[str, Position] = {}
            note_atom(rule.head, var_positions)
            for atom in rule.body:
                note_atom(atom, var_positions)
        if program.query is not None:
            note_atom(program.query, {})

    # -- codecs ----------------------------------------------------------

    def group_of(self, pos: Position) -> Position:
        if pos not in self._parent:
            self._add(pos)
            self._groups.setdefault(pos, [pos])
            self._int_range[pos] = self.declarations.range_for(pos)
        return self._find(pos)

    def int_range(self, pos: Position) -> Optional[tuple[int, int]]:
        return self._int_range[self.group_of(pos)]

    def is_int(self, pos: Position) -> bool:
        return self.int_range(pos) is not None

    def table_for(self, pos: Position) -> StringTable:
        root = self.group_of(pos)
        if self._int_range[root] is not None:
            raise PlanError(f"column {pos} holds declared integers, not strings")
        table = self._tables.get(root)
        if table is None:
            pred, col = root
            table = StringTable(name=f"strings({pred[0]}.{col + 1})")
            self._tables[root] = table
        return table

    def tables(self) -> list[StringTable]:
        """All instantiated string tables, in creation order."""
        return list(self._tables.values())

    def encode_term(self, pos: Position, term: Term) -> int:
        """Runtime integer for a constant term at a column position."""
        rng = self.int_range(pos)
        if rng is not None:
            if term.kind != INT:
                raise PlanError(
                    f"symbol constant {term.name!r} in declared integer column {pos}"
                )
            lo, hi = rng
            if not lo <= term.value <= hi:
                raise PlanError(f"constant {term.value} outside declared domain [{lo}, {hi}]")
            return term.value
        table = self.table_for(pos)
        if term.kind == SYM:
            return table.intern("s" + term.name)
        if term.kind == INT:
            return table.intern("i" + str(term.value))
        raise PlanError("cannot encode a variable")

    def decode_value(self, pos: Position, value: int) -> Term:
        if self.int_range(pos) is not None:
            return Int(value)
        text = self.table_for(pos).resolve(value)
        if text.startswith("i"):
            return Int(int(text[1:]))
        return Sym(text[1:])
