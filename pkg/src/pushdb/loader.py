"""Bulk fact loading into specialized relations.

Reads fact files in chunks and parses one fact per line on the fast path;
anything irregular (quoted commas, doubled-quote escapes, several facts
per line, multi-line facts) falls back to a clause scanner plus the
general tokenizer. Each fact is routed to every descriptor whose
predicate matches and whose constant filters pass; filtered columns are
dropped and the remaining values are interned per column domain (declared
integer columns store the integer directly).

Internally facts travel as lightweight tagged values ('i', int) and
('s', text); Term objects only appear on the general-parser path.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from .datalog.parser import tokenize, _Parser, _FreshVars
from .datalog.terms import INT, Atom, Int, Sym, Term
from .errors import LoadError, ParseError
from .planner.columns import ColumnDomains
from .planner.specialize import EdbDescriptor

DEFAULT_CHUNK_SIZE = 1 << 20  # paper only says "larger chunks"; 1 MiB

_FAST_FACT = re.compile(r"[ \t]*([a-z][A-Za-z0-9_]*)\((.*)\)\.[ \t\r]*\Z")
_FAST_PROP = re.compile(r"[ \t]*([a-z][A-Za-z0-9_]*)\.[ \t\r]*\Z")
_SYM_TOKEN = re.compile(r"[a-z][A-Za-z0-9_]*\Z")
_DIGITS = set("0123456789")


@dataclass
class LoadStats:
    lines_read: int = 0
    facts_parsed: int = 0
    stored: int = 0          # facts accepted by at least one descriptor
    skipped: int = 0         # predicate matched, every filter missed
    non_matching: int = 0    # no descriptor for the predicate
    malformed: int = 0       # tolerant mode only
    stored_per_descriptor: dict[str, int] = field(default_factory=dict)
    duration: float = 0.0

    def merge(self, other: "LoadStats") -> None:
        self.lines_read += other.lines_read
        self.facts_parsed += other.facts_parsed
        self.stored += other.stored
        self.skipped += other.skipped
        self.non_matching += other.non_matching
        self.malformed += other.malformed
        for k, v in other.stored_per_descriptor.items():
            self.stored_per_descriptor[k] = self.stored_per_descriptor.get(k, 0) + v
        self.duration += other.duration


def _tag_term(t: Term) -> tuple:
    return ("i", t.value) if t.kind == INT else ("s", t.name)


def _untag(v: tuple) -> Term:
    return Int(v[1]) if v[0] == "i" else Sym(v[1])


class _SkipFact(Exception):
    pass


class FactRouter:
    """Routes tagged facts into descriptor structures.

    Per-descriptor filters and column codecs are resolved once up front so
    the per-fact work is tuple compares plus direct inserts.
    """

    def __init__(self, descriptors: Iterable[EdbDescriptor], structures: dict[str, object],
                 domains: ColumnDomains, stats: LoadStats, strict: bool = False):
        self.stats = stats
        self.strict = strict
        self._by_key: dict[tuple[str, int], list] = {}
        for desc in descriptors:
            target = structures[desc.name]
            filters = tuple((c, _tag_term(t)) for c, t in desc.filters)
            codecs = []
            for col in desc.retained:
                rng = domains.int_range((desc.pred, col))
                if rng is not None:
                    codecs.append(("int", rng[0], rng[1], desc.pred, col))
                else:
                    codecs.append(("sym", domains.table_for((desc.pred, col)).intern,
                                   desc.pred, col))
            if desc.kind == "map":
                retained_index = {c: i for i, c in enumerate(desc.retained)}
                key_idx = tuple(retained_index[c] for c in desc.key_cols)
                out_idx = tuple(retained_index[c] for c in desc.out_cols)
            else:
                key_idx = out_idx = ()
            self._by_key.setdefault(desc.pred, []).append(
                (desc, target, filters, tuple(codecs), key_idx, out_idx)
            )
            stats.stored_per_descriptor.setdefault(desc.name, 0)

    def route(self, name: str, args: list[tuple], line: int | None = None) -> None:
        """args: tagged values ('i', int) | ('s', text)."""
        stats = self.stats
        stats.facts_parsed += 1
        handlers = self._by_key.get((name, len(args)))
        if handlers is None:
            stats.non_matching += 1
            return
        accepted = False
        for desc, target, filters, codecs, key_idx, out_idx in handlers:
            ok = True
            for col, want in filters:
                if args[col] != want:
                    ok = False
                    break
            if not ok:
                continue
            try:
                encoded = tuple(
                    self._encode(codec, args[col], line)
                    for codec, col in zip(codecs, desc.retained)
                )
            except _SkipFact:
                stats.malformed += 1
                return
            kind = desc.kind
            if kind == "list":
                target.insert(encoded)
            elif kind == "set":
                target.insert_if_new(encoded)
            else:
                target.insert(
                    tuple(encoded[i] for i in key_idx),
                    tuple(encoded[i] for i in out_idx),
                )
            stats.stored_per_descriptor[desc.name] += 1
            accepted = True
        if accepted:
            stats.stored += 1
        else:
            stats.skipped += 1

    def _encode(self, codec, value: tuple, line) -> int:
        if codec[0] == "int":
            if value[0] != "i":
                if self.strict:
                    _kind, _lo, _hi, pred, col = codec
                    raise LoadError(
                        f"symbol {value[1]!r} in declared integer column "
                        f"{pred[0]}/{pred[1]}[{col}]", line,
                    )
                raise _SkipFact()
            v = value[1]
            if not codec[1] <= v <= codec[2]:
                if self.strict:
                    _kind, lo, hi, pred, col = codec
                    raise LoadError(
                        f"value {v} outside declared domain [{lo}, {hi}] "
                        f"for {pred[0]}/{pred[1]}[{col}]", line,
                    )
                raise _SkipFact()
            return v
        intern = codec[1]
        if value[0] == "s":
            return intern("s" + value[1])
        return intern("i" + str(value[1]))


def _parse_args_fast(text: str) -> Optional[list[tuple]]:
    if not text:
        return []
    if "'" in text or "(" in text or ")" in text:
        return None
    out = []
    for part in text.split(","):
        tok = part.strip()
        if not tok:
            return None
        c = tok[0]
        if c in _DIGITS or (c == "-" and len(tok) > 1):
            try:
                out.append(("i", int(tok)))
                continue
            except ValueError:
                return None
        if _SYM_TOKEN.match(tok):
            out.append(("s", tok))
        else:
            return None
    return out


def _parse_fact_general(text: str, line: int) -> tuple[str, list[tuple]]:
    tokens = tokenize(text)
    parser = _Parser(tokens, _FreshVars(set()))
    atom = parser.parse_atom()
    parser.take(".")
    if parser.peek().kind != "eof":
        raise ParseError("trailing input after fact", line, 1)
    if not atom.is_ground:
        raise ParseError(f"fact {atom.predicate!r} contains variables", line, 1)
    return atom.predicate, [_tag_term(t) for t in atom.args]


def _clause_end(buf: str, start: int) -> Optional[int]:
    """Index just past the next clause terminator, or None if incomplete."""
    i = start
    n = len(buf)
    in_quote = False
    in_comment = False
    while i < n:
        c = buf[i]
        if in_comment:
            if c == "\n":
                in_comment = False
            i += 1
            continue
        if in_quote:
            if c == "'":
                if i + 1 < n and buf[i + 1] == "'":
                    i += 2
                    continue
                if i + 1 == n:
                    return None  # cannot tell a closing quote from an escape yet
                in_quote = False
            i += 1
            continue
        if c == "'":
            in_quote = True
            i += 1
            continue
        if c == "%":
            in_comment = True
            i += 1
            continue
        if c == ".":
            return i + 1
        i += 1
    return None


def _only_comments(text: str) -> bool:
    return all(not ln.strip() or ln.lstrip().startswith("%") for ln in text.splitlines())


class FactFileReader:
    """Iterates (name, tagged args, line) per fact.

    One complete fact per line is the fast path; everything else is
    buffered and handed to the clause scanner + general parser, producing
    results identical to a line-at-a-time reference reader.
    """

    def __init__(self, path: str, chunk_size: int = DEFAULT_CHUNK_SIZE, strict: bool = False,
                 stats: Optional[LoadStats] = None):
        self.path = path
        self.chunk_size = chunk_size
        self.strict = strict
        self.stats = stats
        self.lines_read = 0

    def _general(self, text: str, line: int):
        """Split buffered text into clauses and parse each one."""
        start = 0
        results = []
        while True:
            cut = _clause_end(text, start)
            if cut is None:
                break
            clause = text[start:cut].strip()
            start = cut
            if clause and not _only_comments(clause):
                try:
                    results.append(_parse_fact_general(clause, line))
                except ParseError as exc:
                    if self.strict:
                        raise LoadError(f"cannot parse fact: {exc}", line) from exc
                    if self.stats is not None:
                        self.stats.malformed += 1
        return results, text[start:]

    def __iter__(self) -> Iterator[tuple[str, list[tuple], int]]:
        fast_fact = _FAST_FACT.match
        fast_prop = _FAST_PROP.match
        parse_args = _parse_args_fast
        carry = ""
        carry_line = 1
        line = 1
        pending = ""
        with open(self.path, "r", encoding="utf-8") as fh:
            while True:
                chunk = fh.read(self.chunk_size)
                if not chunk:
                    break
                pending += chunk
                parts = pending.split("\n")
                pending = parts.pop()
                for text in parts:
                    if carry:
                        carry += "\n" + text
                        results, carry = self._general(carry, carry_line)
                        for name, args in results:
                            yield name, args, carry_line
                        if not carry.strip():
                            carry = ""
                        line += 1
                        continue
                    m = fast_fact(text)
                    if m is not None:
                        args = parse_args(m.group(2))
                        if args is not None:
                            yield m.group(1), args, line
                            line += 1
                            continue
                    elif not text.strip() or text.lstrip().startswith("%"):
                        line += 1
                        continue
                    else:
                        m2 = fast_prop(text)
                        if m2 is not None:
                            yield m2.group(1), [], line
                            line += 1
                            continue
                    carry = text
                    carry_line = line
                    results, carry = self._general(carry, carry_line)
                    for name, args in results:
                        yield name, args, carry_line
                    if not carry.strip():
                        carry = ""
                    line += 1
        tail = carry + ("\n" if carry and pending else "") + pending
        self.lines_read = line - 1 + (1 if pending else 0)
        if tail.strip() and not _only_comments(tail):
            results, rest = self._general(tail, line)
            for name, args in results:
                yield name, args, line
            if rest.strip() and not _only_comments(rest):
                # no terminating '.'; try the general parser for a clear error
                if self.strict:
                    raise LoadError("unterminated fact at end of file", line)
                if self.stats is not None:
                    self.stats.malformed += 1


def parse_fact_file(path: str, chunk_size: int = DEFAULT_CHUNK_SIZE,
                    strict: bool = True) -> Iterator[Atom]:
    """Parse a fact file into ground atoms (no routing, no interning)."""
    for name, args, _line in FactFileReader(path, chunk_size, strict=strict):
        yield Atom(name, tuple(_untag(v) for v in args))


def route_facts(
    facts: Iterable[Atom],
    descriptors: Iterable[EdbDescriptor],
    structures: dict[str, object],
    domains: ColumnDomains,
    *,
    strict: bool = False,
    stats: Optional[LoadStats] = None,
) -> LoadStats:
    """Route already-parsed ground atoms (e.g. facts inlined in a program)."""
    if stats is None:
        stats = LoadStats()
    router = FactRouter(descriptors, structures, domains, stats, strict=strict)
    for fact in facts:
        router.route(fact.predicate, [_tag_term(t) for t in fact.args])
    return stats


def load_facts(
    paths: str | Iterable[str],
    descriptors: Iterable[EdbDescriptor],
    structures: dict[str, object],
    domains: ColumnDomains,
    *,
    strict: bool = False,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> LoadStats:
    """Populate descriptor structures from Datalog fact files."""
    if isinstance(paths, str):
        paths = [paths]
    stats = LoadStats()
    router = FactRouter(descriptors, structures, domains, stats, strict=strict)
    route = router.route
    t0 = time.perf_counter()
    for path in paths:
        reader = FactFileReader(path, chunk_size, strict=strict, stats=stats)
        for name, args, line in reader:
            route(name, args, line)
        stats.lines_read += reader.lines_read
    stats.duration = time.perf_counter() - t0
    return stats
