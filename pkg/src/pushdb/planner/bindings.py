"""Binding-pattern analysis for nested-loop/index joins.

Within a rule, the IDB input literals are conceptually first (their
variables arrive bound on the incoming fact); remaining literals are
processed left to right. A constant is bound; a variable is bound at its
second and later occurrences.
"""

from __future__ import annotations

from ..datalog.terms import Atom, Program

BOUND = "b"
FREE = "f"


def pattern_for_atom(atom: Atom, bound_vars: set[str]) -> str:
    """Access pattern for one literal given the variables already bound.

    A variable repeated inside the literal counts as bound at its second
    occurrence (the access layer turns that into an equality check).
    """
    chars = []
    seen: set[str] = set()
    for t in atom.args:
        if t.is_const:
            chars.append(BOUND)
        elif t.name in bound_vars or t.name in seen:
            chars.append(BOUND)
        else:
            chars.append(FREE)
            seen.add(t.name)
    return "".join(chars)


def access_pattern_for_atom(atom: Atom, bound_vars: set[str]) -> str:
    """Pattern used to pick the storage structure for one literal.

    Differs from pattern_for_atom on within-literal repeats: the second
    occurrence stays free here and the probe applies an equality check,
    since its value is only known once the row has been fetched.
    """
    chars = []
    for t in atom.args:
        if t.is_const or t.name in bound_vars:
            chars.append(BOUND)
        else:
            chars.append(FREE)
    return "".join(chars)


def analyze_bindings(program: Program) -> dict[tuple[int, int], str]:
    """Binding pattern per (rule index, body literal index).

    IDB literals are treated as input (processed first, all their
    variables bound); each remaining literal is patterned against the
    variables bound so far and then contributes its own.
    """
    patterns: dict[tuple[int, int], str] = {}
    for ri, rule in enumerate(program.rules):
        idb_positions = [i for i, a in enumerate(rule.body) if a.pred in program.idb]
        bound: set[str] = set()
        for i in idb_positions:
            patterns[(ri, i)] = BOUND * rule.body[i].arity
            for t in rule.body[i].args:
                if t.is_var:
                    bound.add(t.name)
        for i, atom in enumerate(rule.body):
            if i in idb_positions:
                continue
            patterns[(ri, i)] = pattern_for_atom(atom, bound)
            for t in atom.args:
                if t.is_var:
                    bound.add(t.name)
    return patterns
