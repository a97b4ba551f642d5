"""Datalog text parser.

Accepted input: rules ``h :- b1, ..., bn.``, ground facts ``p(c1,...,cn).``,
``%`` line comments, and at most one query directive ``?- goal.``.
Single-quoted symbols escape an embedded quote by doubling (``''``).
Unquoted digit tokens are integers; quoted digit tokens are symbols.
Anonymous variables ``_`` are allowed and every occurrence is a fresh
variable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..errors import ParseError, ProgramError
from .terms import Atom, Int, Program, Rule, Sym, Term, Var, pred_to_text

_IDENT_START = set("abcdefghijklmnopqrstuvwxyz")
_VAR_START = set("ABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_")
_DIGITS = set("0123456789")


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident' | 'var' | 'int' | 'quoted' | punctuation literal | 'eof'
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if c == "'":
            # quoted symbol; '' is an escaped quote
            i += 1
            col += 1
            parts: list[str] = []
            while True:
                if i >= n:
                    raise ParseError("unterminated quoted symbol", start_line, start_col)
                c = text[i]
                if c == "'":
                    if i + 1 < n and text[i + 1] == "'":
                        parts.append("'")
                        i += 2
                        col += 2
                        continue
                    i += 1
                    col += 1
                    break
                if c == "\n":
                    line += 1
                    col = 1
                else:
                    col += 1
                parts.append(c)
                i += 1
            tokens.append(Token("quoted", "".join(parts), start_line, start_col))
            continue
        if c in _DIGITS or (c == "-" and i + 1 < n and text[i + 1] in _DIGITS):
            j = i + 1
            while j < n and text[j] in _DIGITS:
                j += 1
            tokens.append(Token("int", text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if c in _IDENT_START or c in _VAR_START:
            j = i + 1
            while j < n and text[j] in _IDENT_CHARS:
                j += 1
            kind = "ident" if c in _IDENT_START else "var"
            tokens.append(Token(kind, text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if c == ":" and i + 1 < n and text[i + 1] == "-":
            tokens.append(Token(":-", ":-", start_line, start_col))
            i += 2
            col += 2
            continue
        if c == "?" and i + 1 < n and text[i + 1] == "-":
            tokens.append(Token("?-", "?-", start_line, start_col))
            i += 2
            col += 2
            continue
        if c in "(),.":
            tokens.append(Token(c, c, start_line, start_col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {c!r}", start_line, start_col)
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token], fresh_vars: "_FreshVars"):
        self.tokens = tokens
        self.pos = 0
        self.fresh = fresh_vars

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def take(self, kind: str) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}, found {tok.text or tok.kind!r}", tok.line, tok.col)
        self.pos += 1
        return tok

    def parse_term(self) -> Term:
        tok = self.peek()
        if tok.kind == "var":
            self.pos += 1
            if tok.text == "_":
                return Var(self.fresh.next())
            return Var(tok.text)
        if tok.kind == "int":
            self.pos += 1
            return Int(int(tok.text))
        if tok.kind in ("ident", "quoted"):
            self.pos += 1
            nxt = self.peek()
            if nxt.kind == "(":
                raise ParseError("function symbols are not supported", nxt.line, nxt.col)
            return Sym(tok.text)
        raise ParseError(f"expected a term, found {tok.text or tok.kind!r}", tok.line, tok.col)

    def parse_atom(self) -> Atom:
        tok = self.peek()
        if tok.kind not in ("ident", "quoted"):
            raise ParseError(f"expected a predicate, found {tok.text or tok.kind!r}", tok.line, tok.col)
        self.pos += 1
        args: list[Term] = []
        if self.peek().kind == "(":
            self.take("(")
            if self.peek().kind != ")":
                args.append(self.parse_term())
                while self.peek().kind == ",":
                    self.take(",")
                    args.append(self.parse_term())
            self.take(")")
        return Atom(tok.text, tuple(args))

    def parse_clauses(self):
        """Yield ('rule', Rule) | ('fact', Atom) | ('query', Atom) items."""
        while self.peek().kind != "eof":
            tok = self.peek()
            if tok.kind == "?-":
                self.take("?-")
                goal = self.parse_atom()
                self.take(".")
                yield ("query", goal, tok)
                continue
            head = self.parse_atom()
            if self.peek().kind == ":-":
                self.take(":-")
                body = [self.parse_atom()]
                while self.peek().kind == ",":
                    self.take(",")
                    body.append(self.parse_atom())
                self.take(".")
                yield ("rule", Rule(head, tuple(body)), tok)
            else:
                self.take(".")
                if not head.is_ground:
                    raise ParseError(
                        f"fact {head.predicate!r} contains variables", tok.line, tok.col
                    )
                yield ("fact", head, tok)


class _FreshVars:
    """Fresh names for anonymous variables, guaranteed not to collide."""

    def __init__(self, used: set[str]):
        self.used = used
        self.counter = 0

    def next(self) -> str:
        while True:
            name = f"_G{self.counter}"
            self.counter += 1
            if name not in self.used:
                self.used.add(name)
                return name


def classify_predicates(rules, facts):
    """Partition predicates into (edb, idb) sets of (name, arity) pairs.

    idb = predicates appearing in some rule head; edb = everything else.
    Rejects a name used at two arities and a predicate defined by both
    facts and rules.
    """
    arities: dict[str, int] = {}

    def note(atom: Atom):
        seen = arities.get(atom.predicate)
        if seen is None:
            arities[atom.predicate] = atom.arity
        elif seen != atom.arity:
            raise ProgramError(
                f"predicate {atom.predicate!r} used with arities {seen} and {atom.arity}"
            )

    head_preds: set = set()
    all_preds: set = set()
    for rule in rules:
        note(rule.head)
        head_preds.add(rule.head.pred)
        all_preds.add(rule.head.pred)
        for atom in rule.body:
            note(atom)
            all_preds.add(atom.pred)
    fact_preds: set = set()
    for fact in facts:
        note(fact)
        fact_preds.add(fact.pred)
        all_preds.add(fact.pred)

    both = head_preds & fact_preds
    if both:
        names = ", ".join(sorted(pred_to_text(p) for p in both))
        raise ProgramError(f"predicates defined by both facts and rules: {names}")

    idb = frozenset(head_preds)
    edb = frozenset(all_preds - head_preds)
    return edb, idb


def build_program(rules, facts, query: Optional[Atom], fresh: Optional[_FreshVars] = None):
    """Assemble a validated Program from parsed clauses.

    Queries whose goal predicate has no defining rule are wrapped into an
    ``answer`` rule with the goal's distinct variables as head arguments.
    Without a directive: ``answer`` if such an IDB predicate exists, else
    the first rule's head predicate.
    """
    rules = list(rules)
    if fresh is None:
        used = set()
        for r in rules:
            used.update(r.body_variables())
            used.update(t.name for t in r.head.args if t.is_var)
        fresh = _FreshVars(used)

    edb, idb = classify_predicates(rules, facts)

    if query is not None and query.pred not in idb:
        if query.pred not in edb:
            raise ProgramError(f"query predicate {pred_to_text(query.pred)} is undefined")
        head_vars = [Var(v) for v in query.variables()]
        wrapper = Rule(Atom("answer", tuple(head_vars)), (query,))
        rules.append(wrapper)
        edb, idb = classify_predicates(rules, facts)
        query = wrapper.head

    if query is None:
        answer_like = [p for p in idb if p[0] == "answer"]
        if answer_like:
            pred = answer_like[0]
        elif rules:
            pred = rules[0].head.pred
        else:
            pred = None
        if pred is not None:
            query = Atom(pred[0], tuple(Var(fresh.next()) for _ in range(pred[1])))

    return Program(tuple(rules), query, edb, idb)


def parse_program(text: str):
    """Parse Datalog text into (Program, initial EDB fact list)."""
    tokens = tokenize(text)
    used_vars = {t.text for t in tokens if t.kind == "var" and t.text != "_"}
    fresh = _FreshVars(used_vars)
    parser = _Parser(tokens, fresh)

    rules: list[Rule] = []
    facts: list[Atom] = []
    query: Optional[Atom] = None
    for item in parser.parse_clauses():
        kind, payload, tok = item
        if kind == "rule":
            rules.append(payload)
        elif kind == "fact":
            facts.append(payload)
        else:
            if query is not None:
                raise ParseError("duplicate query directive", tok.line, tok.col)
            query = payload

    program = build_program(rules, facts, query, fresh)
    return program, facts
