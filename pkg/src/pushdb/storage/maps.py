"""Map (multimap) relations for mixed binding patterns.

Given values for the key columns, a cursor yields the value tuples stored
under that key in insertion order. Cursors are snapshots: insertions made
after a cursor was opened never appear in its yield.

Two storage strategies, same interface: a hash index (general case) and a
flexible array indexed by a single dense integer key, used when the
planner declares a dense key domain.
"""

from __future__ import annotations

from typing import Iterator

from ..errors import StorageError


class MapRelation:
    __slots__ = ("name", "key_arity", "value_arity", "row_count",
                 "_dict", "_flex", "_flex_lo")

    def __init__(self, key_arity: int, value_arity: int, name: str = "map",
                 dense_key_range: tuple[int, int] | None = None):
        if key_arity < 0 or value_arity < 0:
            raise StorageError("arities must be nonnegative")
        self.name = name
        self.key_arity = key_arity
        self.value_arity = value_arity
        self.row_count = 0
        self._dict: dict | None = None
        self._flex: list | None = None
        self._flex_lo = 0
        if dense_key_range is not None and key_arity == 1:
            lo, hi = dense_key_range
            if hi < lo:
                raise StorageError(f"empty dense key range [{lo}, {hi}]")
            self._flex = [None] * (hi - lo + 1)
            self._flex_lo = lo
        else:
            self._dict = {}

    # keys with arity 1 are stored raw (int), larger keys as tuples
    def _key(self, key: tuple[int, ...]):
        return key[0] if self.key_arity == 1 else key

    def insert(self, key: tuple[int, ...], value: tuple[int, ...]) -> None:
        if len(key) != self.key_arity:
            raise StorageError(f"{self.name}: expected key arity {self.key_arity}, got {len(key)}")
        if len(value) != self.value_arity:
            raise StorageError(f"{self.name}: expected value arity {self.value_arity}, got {len(value)}")
        stored = value[0] if self.value_arity == 1 else value
        if self._flex is not None:
            idx = key[0] - self._flex_lo
            if not 0 <= idx < len(self._flex):
                raise StorageError(f"{self.name}: key {key[0]} outside declared dense domain")
            bucket = self._flex[idx]
            if bucket is None:
                self._flex[idx] = [stored]
            else:
                bucket.append(stored)
        else:
            bucket = self._dict.get(self._key(key))
            if bucket is None:
                self._dict[self._key(key)] = [stored]
            else:
                bucket.append(stored)
        self.row_count += 1

    def raw_values(self, key) -> list | None:
        """Internal value list for a raw key (int for key arity 1).

        Engine-side fast path; returns None for absent keys. Items are bare
        ints when value_arity == 1, tuples otherwise.
        """
        if self._flex is not None:
            idx = key - self._flex_lo
            if 0 <= idx < len(self._flex):
                return self._flex[idx]
            return None
        return self._dict.get(key)

    def cursor_for(self, key: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        if len(key) != self.key_arity:
            raise StorageError(f"{self.name}: expected key arity {self.key_arity}, got {len(key)}")
        bucket = self.raw_values(key[0] if self.key_arity == 1 else key)
        if bucket is None:
            return iter(())
        return self._snapshot(bucket, len(bucket))

    def _snapshot(self, bucket: list, limit: int) -> Iterator[tuple[int, ...]]:
        if self.value_arity == 1:
            for i in range(limit):
                yield (bucket[i],)
        else:
            for i in range(limit):
                yield bucket[i]

    def keys(self):
        if self._flex is not None:
            lo = self._flex_lo
            return (lo + i for i, b in enumerate(self._flex) if b)
        return iter(self._dict)

    def memory_bytes(self) -> int:
        if self._flex is not None:
            buckets = sum(64 + 8 * len(b) for b in self._flex if b is not None)
            return 8 * len(self._flex) + buckets + 64
        buckets = sum(64 + 8 * len(b) for b in self._dict.values())
        return 24 * len(self._dict) + buckets + 64
