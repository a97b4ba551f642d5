"""Per-structure memory accounting, reported in registration order."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class MemoryEntry:
    name: str
    rows: int
    bytes: int


@dataclass(frozen=True)
class MemoryReport:
    entries: tuple[MemoryEntry, ...]

    @property
    def total_bytes(self) -> int:
        return sum(e.bytes for e in self.entries)

    def as_dict(self) -> dict[str, dict[str, int]]:
        return {e.name: {"rows": e.rows, "bytes": e.bytes} for e in self.entries}


class StructureRegistry:
    """Ordered registry of relation structures for memory reports."""

    def __init__(self):
        self._structures: list[tuple[str, object]] = []

    def register(self, name: str, structure) -> None:
        self._structures.append((name, structure))

    def report(self) -> MemoryReport:
        entries = []
        for name, s in self._structures:
            rows = getattr(s, "row_count")
            entries.append(MemoryEntry(name, rows, s.memory_bytes()))
        return MemoryReport(tuple(entries))


def memory_report(structures: list[tuple[str, object]]) -> MemoryReport:
    reg = StructureRegistry()
    for name, s in structures:
        reg.register(name, s)
    return reg.report()
