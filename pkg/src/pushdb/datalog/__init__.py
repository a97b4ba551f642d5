from .analysis import PredicateGraph, build_predicate_graph, check_range_restriction
from .parser import build_program, classify_predicates, parse_program
from .terms import (
    Atom,
    Int,
    Pred,
    Program,
    Rule,
    Sym,
    Term,
    Var,
    atom_to_text,
    fact_to_text,
    pred_to_text,
    program_to_text,
    rule_to_text,
    term_to_text,
)

__all__ = [
    "Atom",
    "Int",
    "Pred",
    "PredicateGraph",
    "Program",
    "Rule",
    "Sym",
    "Term",
    "Var",
    "atom_to_text",
    "build_predicate_graph",
    "build_program",
    "check_range_restriction",
    "classify_predicates",
    "fact_to_text",
    "parse_program",
    "pred_to_text",
    "program_to_text",
    "rule_to_text",
    "term_to_text",
]
