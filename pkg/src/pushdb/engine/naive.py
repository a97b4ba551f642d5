"""Naive fixpoint evaluation: the brute-force correctness oracle.

Deliberately independent of the storage kit and the planner: relations
are plain Python sets of value tuples (symbols as str, integers as int,
so the two kinds can never collide), rules are matched with a recursive
pattern matcher, and the whole rule set is re-applied until nothing new
appears. Intended for small instances (<= ~10^4 facts).
"""

from __future__ import annotations

from ..datalog.terms import INT, Atom, Pred, Program, Term
from ..errors import PushdbError

Value = "str | int"


def term_value(t: Term):
    return t.value if t.kind == INT else t.name


class _Indexed:
    __slots__ = ("rows", "version", "_indexes", "_index_version")

    def __init__(self):
        self.rows: set[tuple] = set()
        self.version = 0
        self._indexes: dict[tuple[int, ...], dict] = {}
        self._index_version: dict[tuple[int, ...], int] = {}

    def add(self, row: tuple) -> bool:
        if row in self.rows:
            return False
        self.rows.add(row)
        self.version += 1
        return True

    def index(self, positions: tuple[int, ...]) -> dict:
        idx = self._indexes.get(positions)
        if idx is None or self._index_version[positions] != self.version:
            idx = {}
            for row in self.rows:
                idx.setdefault(tuple(row[p] for p in positions), []).append(row)
            self._indexes[positions] = idx
            self._index_version[positions] = self.version
        return idx


def execute_naive(program: Program, facts, iteration_limit: int = 100000):
    """Least model of the program: {pred: set of value tuples} per IDB pred."""
    rels: dict[Pred, _Indexed] = {}

    def rel(pred: Pred) -> _Indexed:
        r = rels.get(pred)
        if r is None:
            r = rels[pred] = _Indexed()
        return r

    for fact in facts:
        rel(fact.pred).add(tuple(term_value(t) for t in fact.args))
    for p in program.edb | program.idb:
        rel(p)

    def matches(atom: Atom, env: dict):
        r = rels[atom.pred]
        bound_positions = []
        key = []
        for i, t in enumerate(atom.args):
            if t.is_const:
                bound_positions.append(i)
                key.append(term_value(t))
            elif t.name in env:
                bound_positions.append(i)
                key.append(env[t.name])
        if bound_positions:
            candidates = r.index(tuple(bound_positions)).get(tuple(key), ())
        else:
            candidates = list(r.rows)
        for row in candidates:
            new_env = env
            ok = True
            for i, t in enumerate(atom.args):
                if t.is_var and t.name not in env:
                    if new_env is env:
                        new_env = dict(env)
                    if t.name in new_env and new_env[t.name] != row[i]:
                        ok = False
                        break
                    new_env[t.name] = row[i]
            if ok:
                yield new_env

    def derive(rule) -> list[tuple]:
        out = []

        def walk(i, env):
            if i == len(rule.body):
                out.append(tuple(
                    term_value(t) if t.is_const else env[t.name] for t in rule.head.args
                ))
                return
            for env2 in matches(rule.body[i], env):
                walk(i + 1, env2)

        walk(0, {})
        return out

    for _round in range(iteration_limit):
        changed = False
        for rule in program.rules:
            target = rel(rule.head.pred)
            for row in derive(rule):
                if target.add(row):
                    changed = True
        if not changed:
            return {p: set(rels[p].rows) for p in program.idb}
    raise PushdbError(f"naive evaluation exceeded {iteration_limit} iterations")
