"""Core Datalog model: terms, atoms, rules, programs.

Terms are variables, symbol constants, or integer constants. Symbol and
integer constants are distinct kinds and never compare equal, even when
their printed text coincides (55 vs '55').
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

VAR = "var"
SYM = "sym"
INT = "int"

Pred = tuple[str, int]  # (name, arity); arity is part of predicate identity


@dataclass(frozen=True)
class Term:
    kind: str
    name: str = ""
    value: int = 0

    @property
    def is_var(self) -> bool:
        return self.kind == VAR

    @property
    def is_const(self) -> bool:
        return self.kind != VAR

    def __repr__(self) -> str:
        return f"Term({term_to_text(self)!r})"


def Var(name: str) -> Term:
    return Term(VAR, name=name)


def Sym(text: str) -> Term:
    return Term(SYM, name=text)


def Int(value: int) -> Term:
    return Term(INT, value=value)


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...]

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def pred(self) -> Pred:
        return (self.predicate, len(self.args))

    @property
    def is_ground(self) -> bool:
        return all(t.is_const for t in self.args)

    def variables(self) -> list[str]:
        """Distinct variable names in first-occurrence order."""
        seen: list[str] = []
        for t in self.args:
            if t.is_var and t.name not in seen:
                seen.append(t.name)
        return seen

    def __repr__(self) -> str:
        return f"Atom({atom_to_text(self)!r})"


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: tuple[Atom, ...]

    def body_variables(self) -> set[str]:
        names: set[str] = set()
        for atom in self.body:
            for t in atom.args:
                if t.is_var:
                    names.add(t.name)
        return names

    def __repr__(self) -> str:
        return f"Rule({rule_to_text(self)!r})"


@dataclass(frozen=True)
class Program:
    """A validated program: rules plus predicate classification.

    ``query`` is the designated answer goal; it is None only for programs
    without rules. EDB facts parsed alongside the rules are *not* part of
    the Program; parse_program returns them separately.
    """

    rules: tuple[Rule, ...]
    query: Optional[Atom]
    edb: frozenset[Pred]
    idb: frozenset[Pred]

    @property
    def answer_pred(self) -> Optional[Pred]:
        return self.query.pred if self.query is not None else None

    def idb_body_literals(self, rule: Rule) -> list[int]:
        """Positions of IDB literals in a rule body."""
        return [i for i, a in enumerate(rule.body) if a.pred in self.idb]


# ---------------------------------------------------------------------------
# Printing. parse(print(p)) == p for every built Program (round-trip tests).
# ---------------------------------------------------------------------------

_PLAIN_SYM = re.compile(r"[a-z][A-Za-z0-9_]*\Z")


def term_to_text(t: Term) -> str:
    if t.kind == VAR:
        return t.name
    if t.kind == INT:
        return str(t.value)
    if _PLAIN_SYM.match(t.name):
        return t.name
    return "'" + t.name.replace("'", "''") + "'"


def atom_to_text(a: Atom) -> str:
    name = a.predicate if _PLAIN_SYM.match(a.predicate) else "'" + a.predicate.replace("'", "''") + "'"
    if not a.args:
        return name
    return name + "(" + ", ".join(term_to_text(t) for t in a.args) + ")"


def rule_to_text(r: Rule) -> str:
    return atom_to_text(r.head) + " :- " + ", ".join(atom_to_text(a) for a in r.body) + "."


def fact_to_text(a: Atom) -> str:
    return atom_to_text(a) + "."


def program_to_text(program: Program, facts: Iterable[Atom] = ()) -> str:
    lines = [rule_to_text(r) for r in program.rules]
    lines.extend(fact_to_text(f) for f in facts)
    if program.query is not None:
        lines.append("?- " + atom_to_text(program.query) + ".")
    return "\n".join(lines) + "\n"


def pred_to_text(p: Pred) -> str:
    return f"{p[0]}/{p[1]}"
