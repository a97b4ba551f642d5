"""Bundled benchmark programs."""

from __future__ import annotations

from ..datalog.parser import parse_program
from ..datalog.terms import Program

TC_FF_TEXT = """\
tc(X, Y) :- par(X, Y).
tc(X, Y) :- par(X, Z), tc(Z, Y).
?- tc(X, Y).
"""

# The bound-first-argument variant executes a pre-transformed program
# (tail recursion reduced to arity 1). p0 is redundant but kept verbatim,
# matching the transformation tool's output.
TC_BF_TEXT = """\
p1(A) :- p1(B), par(B, A).
p1(A) :- par(1, A).
p0(A) :- p1(B), par(B, A).
p0(A) :- par(1, A).
tc(1, A) :- p0(A).
?- tc(1, A).
"""

JOIN1_TEXT = """\
a(X, Y) :- b1(X, Z), b2(Z, Y).
b1(X, Y) :- c1(X, Z), c2(Z, Y).
b2(X, Y) :- c3(X, Z), c4(Z, Y).
c1(X, Y) :- d1(X, Z), d2(Z, Y).
?- a(X, Y).
"""

DBLP_TEXT = """\
answer(Id, T, A, Y, M) :-
    att(Id, title, T),
    att(Id, year, Y),
    att(Id, author, A),
    att(Id, month, M).
?- answer(Id, T, A, Y, M).
"""

FIXTURES: dict[str, str] = {
    "tc-ff": TC_FF_TEXT,
    "tc-bf": TC_BF_TEXT,
    "join1": JOIN1_TEXT,
    "dblp": DBLP_TEXT,
}


def fixture_text(name: str) -> str:
    return FIXTURES[name]


def fixture_program(name: str) -> Program:
    program, _facts = parse_program(FIXTURES[name])
    return program


def fixture_tc_bf() -> Program:
    """The five-rule bound-argument transitive closure program."""
    return fixture_program("tc-bf")
