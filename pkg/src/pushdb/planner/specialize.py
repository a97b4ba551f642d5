"""Load-time EDB specialization.

Each EDB body-literal occurrence gets a relation shaped for exactly its
access: constant arguments become load-time filters (the filtered column
is not stored), and the residual binding pattern picks the structure
(all-free -> list, all-bound -> set, mixed -> map). Descriptors with the
same predicate, filters and pattern are shared.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..datalog.terms import Atom, Pred, Term, term_to_text
from .bindings import access_pattern_for_atom
from .normalize import NormalizedProgram


@dataclass(frozen=True)
class EdbDescriptor:
    pred: Pred
    filters: tuple[tuple[int, Term], ...]  # (column, constant), ordered by column
    retained: tuple[int, ...]              # stored source columns
    pattern: str                           # over retained columns
    kind: str                              # 'list' | 'map' | 'set'
    name: str

    @property
    def key_cols(self) -> tuple[int, ...]:
        """Source columns probed as bound, in retained order."""
        return tuple(c for c, ch in zip(self.retained, self.pattern) if ch == "b")

    @property
    def out_cols(self) -> tuple[int, ...]:
        return tuple(c for c, ch in zip(self.retained, self.pattern) if ch == "f")


_NAME_OK = re.compile(r"[A-Za-z0-9_]+\Z")


def _const_tag(term: Term) -> str:
    text = term_to_text(term)
    if _NAME_OK.match(text):
        return text
    return "q" + "".join(ch if ch.isalnum() else "_" for ch in text)[:16]


class DescriptorSet:
    """Deduplicating builder; preserves first-creation order."""

    def __init__(self):
        self._by_key: dict = {}
        self.descriptors: list[EdbDescriptor] = []
        self._names: set[str] = set()

    def get(self, atom: Atom, bound_vars: set[str]) -> EdbDescriptor:
        filters = tuple((i, t) for i, t in enumerate(atom.args) if t.is_const)
        retained = tuple(i for i, t in enumerate(atom.args) if t.is_var)
        seen: set[str] = set()
        chars = []
        for i in retained:
            name = atom.args[i].name
            if name in bound_vars:
                chars.append("b")
            else:
                chars.append("f")  # in-literal repeats are equality-checked
                seen.add(name)
        pattern = "".join(chars)
        key = (atom.pred, filters, pattern)
        desc = self._by_key.get(key)
        if desc is None:
            base = "_".join([atom.predicate, *(_const_tag(t) for _, t in filters), pattern or "unit"])
            name = base
            n = 2
            while name in self._names:
                name = f"{base}_{n}"
                n += 1
            self._names.add(name)
            kind = "list" if "b" not in pattern else ("set" if "f" not in pattern else "map")
            desc = EdbDescriptor(atom.pred, filters, retained, pattern, kind, name)
            self._by_key[key] = desc
            self.descriptors.append(desc)
        return desc


def specialize_edb(norm: NormalizedProgram):
    """Descriptors for every EDB access, plus the per-access mapping.

    Returns (descriptors, access_map) where access_map keys are
    (norm rule index, body position).
    """
    dset = DescriptorSet()
    access: dict[tuple[int, int], EdbDescriptor] = {}
    edb = norm.program.edb
    for nr in norm.rules:
        bound: set[str] = set()
        if nr.push is not None:
            bound.update(t.name for t in nr.push.args if t.is_var)
        for bi, acc in enumerate(nr.body):
            if acc.temp_id is None and acc.atom.pred in edb:
                access[(nr.index, bi)] = dset.get(acc.atom, bound)
            bound.update(t.name for t in acc.atom.args if t.is_var)
    return dset.descriptors, access
