"""Set relations: binding pattern bb...b with new/duplicate verdicts.

Three implementations, selectable per structure:

* ``FixedHashSet`` -- hash table of fixed bucket count, collisions chained.
* ``DynamicHashSet`` -- open addressing; doubles when load factor > 0.75.
* ``BitmapSet`` -- array indexed by the leading columns with a bitmap over
  the last column; valid only for declared dense integer domains.

All three agree on the new/duplicate verdict for every insertion sequence;
tests never depend on iteration order.
"""

from __future__ import annotations

from typing import Iterable, Iterator

from ..errors import StorageError

_FIELD_BITS = 32
_FIELD_SPAN = 1 << _FIELD_BITS
_MIX = 0x9E3779B97F4A7C15
_U64 = (1 << 64) - 1


def _pack(row: tuple[int, ...], offsets: tuple[int, ...]) -> int:
    key = 1  # leading sentinel keeps packed keys distinct across arities
    for v, off in zip(row, offsets):
        v += off
        if not 0 <= v < _FIELD_SPAN:
            raise StorageError(f"value {v - off} outside the 32-bit packing range")
        key = (key << _FIELD_BITS) | v
    return key


def _unpack(key: int, arity: int, offsets: tuple[int, ...]) -> tuple[int, ...]:
    vals = []
    for _ in range(arity):
        vals.append(key & (_FIELD_SPAN - 1))
        key >>= _FIELD_BITS
    vals.reverse()
    return tuple(v - off for v, off in zip(vals, offsets))


class _SetBase:
    name: str
    arity: int
    element_count: int

    def insert_if_new(self, row: tuple[int, ...]) -> bool:
        raise NotImplementedError

    def __contains__(self, row: tuple[int, ...]) -> bool:
        raise NotImplementedError

    def __len__(self) -> int:
        return self.element_count

    @property
    def row_count(self) -> int:
        return self.element_count

    def _check_arity(self, row):
        if len(row) != self.arity:
            raise StorageError(f"{self.name}: expected arity {self.arity}, got {len(row)}")


class FixedHashSet(_SetBase):
    """Chained hash table with a fixed bucket count (default 2^20)."""

    __slots__ = ("name", "arity", "element_count", "_offsets", "_buckets", "_mask")

    def __init__(self, arity: int, name: str = "set", buckets: int = 1 << 20,
                 ranges: Iterable[tuple[int, int]] | None = None):
        if buckets & (buckets - 1):
            raise StorageError("bucket count must be a power of two")
        self.name = name
        self.arity = arity
        self.element_count = 0
        self._offsets = tuple(-lo for lo, _hi in ranges) if ranges else (0,) * arity
        self._buckets: list = [None] * buckets
        self._mask = buckets - 1

    def insert_if_new(self, row: tuple[int, ...]) -> bool:
        self._check_arity(row)
        key = _pack(row, self._offsets)
        idx = ((key * _MIX) & _U64) >> 40 & self._mask
        slot = self._buckets[idx]
        if slot is None:
            self._buckets[idx] = key
        elif isinstance(slot, int):
            if slot == key:
                return False
            self._buckets[idx] = [slot, key]
        else:
            if key in slot:
                return False
            slot.append(key)
        self.element_count += 1
        return True

    def __contains__(self, row: tuple[int, ...]) -> bool:
        self._check_arity(row)
        key = _pack(row, self._offsets)
        idx = ((key * _MIX) & _U64) >> 40 & self._mask
        slot = self._buckets[idx]
        if slot is None:
            return False
        if isinstance(slot, int):
            return slot == key
        return key in slot

    def items(self) -> Iterator[tuple[int, ...]]:
        for slot in self._buckets:
            if slot is None:
                continue
            if isinstance(slot, int):
                yield _unpack(slot, self.arity, self._offsets)
            else:
                for key in slot:
                    yield _unpack(key, self.arity, self._offsets)

    def memory_bytes(self) -> int:
        chained = sum(8 * len(s) + 64 for s in self._buckets if isinstance(s, list))
        return 8 * len(self._buckets) + chained + 16 * self.element_count + 64


class DynamicHashSet(_SetBase):
    """Open-addressing hash table; doubles once load factor exceeds 0.75."""

    __slots__ = ("name", "arity", "element_count", "_offsets", "_table", "_mask",
                 "_threshold", "growth_events")

    LOAD_FACTOR = 0.75

    def __init__(self, arity: int, name: str = "set", initial_buckets: int = 1 << 10,
                 ranges: Iterable[tuple[int, int]] | None = None):
        if initial_buckets & (initial_buckets - 1):
            raise StorageError("bucket count must be a power of two")
        self.name = name
        self.arity = arity
        self.element_count = 0
        self._offsets = tuple(-lo for lo, _hi in ranges) if ranges else (0,) * arity
        self._table: list[int] = [-1] * initial_buckets
        self._mask = initial_buckets - 1
        self._threshold = int(initial_buckets * self.LOAD_FACTOR)
        self.growth_events = 0

    @property
    def bucket_count(self) -> int:
        return self._mask + 1

    def insert_if_new(self, row: tuple[int, ...]) -> bool:
        self._check_arity(row)
        key = _pack(row, self._offsets)
        table, mask = self._table, self._mask
        idx = ((key * _MIX) & _U64) >> 32 & mask
        while True:
            cur = table[idx]
            if cur < 0:
                table[idx] = key
                self.element_count += 1
                if self.element_count > self._threshold:
                    self._grow()
                return True
            if cur == key:
                return False
            idx = (idx + 1) & mask

    def _grow(self) -> None:
        old = self._table
        size = (self._mask + 1) * 2
        table = [-1] * size
        mask = size - 1
        for key in old:
            if key < 0:
                continue
            idx = ((key * _MIX) & _U64) >> 32 & mask
            while table[idx] >= 0:
                idx = (idx + 1) & mask
            table[idx] = key
        self._table = table
        self._mask = mask
        self._threshold = int(size * self.LOAD_FACTOR)
        self.growth_events += 1

    def __contains__(self, row: tuple[int, ...]) -> bool:
        self._check_arity(row)
        key = _pack(row, self._offsets)
        table, mask = self._table, self._mask
        idx = ((key * _MIX) & _U64) >> 32 & mask
        while True:
            cur = table[idx]
            if cur < 0:
                return False
            if cur == key:
                return True
            idx = (idx + 1) & mask

    def items(self) -> Iterator[tuple[int, ...]]:
        for key in self._table:
            if key >= 0:
                yield _unpack(key, self.arity, self._offsets)

    def memory_bytes(self) -> int:
        return 8 * len(self._table) + 16 * self.element_count + 64


class BitmapSet(_SetBase):
    """Array of bitmaps over declared dense integer domains.

    The leading columns address a (lazily allocated) row; the last column
    selects a bit within the row's bitmap.
    """

    __slots__ = ("name", "arity", "element_count", "_ranges", "_row_strides",
                 "_rows", "_last_lo", "_last_width", "_row_bytes")

    MAX_ROWS = 1 << 22
    MAX_LAST_WIDTH = 1 << 24

    def __init__(self, ranges: list[tuple[int, int]], name: str = "set"):
        if not ranges:
            raise StorageError("bitmap sets need arity >= 1")
        for lo, hi in ranges:
            if hi < lo:
                raise StorageError(f"empty domain range [{lo}, {hi}]")
        self.name = name
        self.arity = len(ranges)
        self.element_count = 0
        self._ranges = tuple(ranges)
        widths = [hi - lo + 1 for lo, hi in ranges]
        self._last_lo = ranges[-1][0]
        self._last_width = widths[-1]
        if self._last_width > self.MAX_LAST_WIDTH:
            raise StorageError("bitmap row width too large")
        # mixed-radix strides so that row index increases with column order
        strides = []
        acc = 1
        for w in reversed(widths[:-1]):
            strides.append(acc)
            acc *= w
        strides.reverse()
        if acc > self.MAX_ROWS:
            raise StorageError("bitmap leading-column space too large")
        self._row_strides = tuple(strides)
        self._rows: list[bytearray | None] = [None] * acc
        self._row_bytes = (self._last_width + 7) >> 3

    def _row_index(self, row: tuple[int, ...]) -> int:
        idx = 0
        for v, (lo, hi), stride in zip(row, self._ranges, self._row_strides):
            if not lo <= v <= hi:
                raise StorageError(f"{self.name}: value {v} outside declared domain [{lo}, {hi}]")
            idx += (v - lo) * stride
        return idx

    def insert_if_new(self, row: tuple[int, ...]) -> bool:
        self._check_arity(row)
        r = self._row_index(row)
        last = row[-1]
        lo, hi = self._ranges[-1]
        if not lo <= last <= hi:
            raise StorageError(f"{self.name}: value {last} outside declared domain [{lo}, {hi}]")
        bits = self._rows[r]
        if bits is None:
            bits = self._rows[r] = bytearray(self._row_bytes)
        bit = last - lo
        byte, mask = bit >> 3, 1 << (bit & 7)
        if bits[byte] & mask:
            return False
        bits[byte] |= mask
        self.element_count += 1
        return True

    def __contains__(self, row: tuple[int, ...]) -> bool:
        self._check_arity(row)
        r = self._row_index(row)
        last = row[-1]
        lo, hi = self._ranges[-1]
        if not lo <= last <= hi:
            return False
        bits = self._rows[r]
        if bits is None:
            return False
        bit = last - lo
        return bool(bits[bit >> 3] & (1 << (bit & 7)))

    def items(self) -> Iterator[tuple[int, ...]]:
        """Tuples in lexicographic order of the declared domains."""
        lead_ranges = self._ranges[:-1]
        lo_last = self._last_lo
        for r, bits in enumerate(self._rows):
            if bits is None:
                continue
            lead = []
            rem = r
            for (lo, _hi), stride in zip(lead_ranges, self._row_strides):
                q, rem = divmod(rem, stride)
                lead.append(lo + q)
            for bit in range(self._last_width):
                if bits[bit >> 3] & (1 << (bit & 7)):
                    yield tuple(lead) + (lo_last + bit,)

    def row_bits(self, lead: tuple[int, ...]) -> int:
        """Bitmap of one row as an int (bit i = last-column value lo+i)."""
        idx = self._row_index(lead + (self._last_lo,))
        bits = self._rows[idx]
        return 0 if bits is None else int.from_bytes(bits, "little")

    def memory_bytes(self) -> int:
        allocated = sum(self._row_bytes + 57 for b in self._rows if b is not None)
        return allocated + 8 * len(self._rows) + 64


def make_set(arity: int, impl: str, name: str = "set",
             ranges: list[tuple[int, int]] | None = None,
             fixed_buckets: int = 1 << 20) -> _SetBase:
    if impl == "bitmap":
        if not ranges or len(ranges) != arity:
            raise StorageError("bitmap sets require a declared dense domain per column")
        return BitmapSet(list(ranges), name=name)
    if impl == "dynhash":
        return DynamicHashSet(arity, name=name, ranges=ranges)
    if impl == "fixedhash":
        return FixedHashSet(arity, name=name, buckets=fixed_buckets, ranges=ranges)
    raise StorageError(f"unknown set implementation {impl!r}")
