"""String interning tables with dense sequential ids."""

from __future__ import annotations

import sys

from ..errors import StorageError


class StringTable:
    """Bijective text <-> id mapping; ids are dense, starting at 0.

    One table is kept per column domain so that ids stay dense per domain,
    which array-backed structures rely on.
    """

    __slots__ = ("name", "_forward", "_reverse", "_string_bytes")

    def __init__(self, name: str = "strings"):
        self.name = name
        self._forward: dict[str, int] = {}
        self._reverse: list[str] = []
        self._string_bytes = 0

    def intern(self, text: str) -> int:
        ident = self._forward.get(text)
        if ident is not None:
            return ident
        ident = len(self._reverse)
        self._forward[text] = ident
        self._reverse.append(text)
        self._string_bytes += sys.getsizeof(text)
        return ident

    def resolve(self, ident: int) -> str:
        if 0 <= ident < len(self._reverse):
            return self._reverse[ident]
        raise StorageError(f"string id {ident} out of range (table {self.name!r}, size {len(self._reverse)})")

    def lookup(self, text: str) -> int | None:
        """Id for text if already interned, else None (no insertion)."""
        return self._forward.get(text)

    def __len__(self) -> int:
        return len(self._reverse)

    def __contains__(self, text: str) -> bool:
        return text in self._forward

    @property
    def row_count(self) -> int:
        return len(self._reverse)

    def memory_bytes(self) -> int:
        # strings themselves, dict slots, reverse list slots
        return self._string_bytes + 24 * len(self._forward) + 8 * len(self._reverse) + 128
