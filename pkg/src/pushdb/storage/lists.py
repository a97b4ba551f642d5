"""List relations: binding pattern ff...f, insertion order, snapshot cursors."""

from __future__ import annotations

from typing import Iterator

from ..errors import StorageError

PAGE_BYTES = 4096
INT_WIDTH = 8


class ListRelation:
    """Append-only tuple list stored as a directory of fixed-size pages.

    Tuples on one page sit in one contiguous Python list; the directory
    holds page references. Duplicates are permitted; iteration follows
    insertion order. A cursor opened at time t yields exactly the tuples
    present at t, regardless of later insertions.
    """

    __slots__ = ("name", "arity", "_page_capacity", "_pages", "row_count")

    def __init__(self, arity: int, name: str = "list"):
        if arity < 0:
            raise StorageError("arity must be nonnegative")
        self.name = name
        self.arity = arity
        self._page_capacity = max(1, PAGE_BYTES // (INT_WIDTH * arity)) if arity else PAGE_BYTES // INT_WIDTH
        self._pages: list[list[tuple[int, ...]]] = []
        self.row_count = 0

    def insert(self, row: tuple[int, ...]) -> None:
        if len(row) != self.arity:
            raise StorageError(f"{self.name}: expected arity {self.arity}, got {len(row)}")
        pages = self._pages
        if not pages or len(pages[-1]) >= self._page_capacity:
            pages.append([])
        pages[-1].append(row)
        self.row_count += 1

    def cursor(self) -> Iterator[tuple[int, ...]]:
        """Snapshot iterator over the rows present right now."""
        return self._snapshot_iter(self.row_count)

    def _snapshot_iter(self, limit: int) -> Iterator[tuple[int, ...]]:
        cap = self._page_capacity
        full, rem = divmod(limit, cap)
        for p in range(full):
            yield from self._pages[p]
        if rem:
            page = self._pages[full]
            for i in range(rem):
                yield page[i]

    def pages_snapshot(self) -> tuple[list, int]:
        """(pages list, row limit) for engine-side tight scans."""
        return self._pages, self.row_count

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return self.cursor()

    def __len__(self) -> int:
        return self.row_count

    def memory_bytes(self) -> int:
        data = len(self._pages) * PAGE_BYTES  # allocated page space
        directory = 8 * len(self._pages) + 64
        return data + directory
