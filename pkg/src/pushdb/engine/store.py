"""Structure instantiation shared by the push and seminaive engines.

Implementation selection: 'auto' picks a bitmap set when every column has
a declared dense integer domain that fits, dynamic hashing otherwise; an
explicit choice is honored or rejected (bitmap without declared domains
is an error).
"""

from __future__ import annotations

from typing import Optional

from ..errors import StorageError
from ..planner.columns import ColumnDomains
from ..planner.specialize import EdbDescriptor
from ..storage.lists import ListRelation
from ..storage.maps import MapRelation
from ..storage.sets import BitmapSet, make_set


def ranges_for(domains: ColumnDomains, positions) -> Optional[list[tuple[int, int]]]:
    ranges = []
    for pos in positions:
        r = domains.int_range(pos)
        if r is None:
            return None
        ranges.append(r)
    return ranges


def bitmap_fits(ranges) -> bool:
    if not ranges:
        return False
    lead = 1
    for lo, hi in ranges[:-1]:
        lead *= hi - lo + 1
    lo, hi = ranges[-1]
    return lead <= BitmapSet.MAX_ROWS and (hi - lo + 1) <= BitmapSet.MAX_LAST_WIDTH


def build_set(arity: int, ranges, name: str, impl: str, fixed_buckets: int = 1 << 20):
    if impl == "auto":
        impl = "bitmap" if ranges and bitmap_fits(ranges) else "dynhash"
    if impl == "bitmap":
        if not ranges:
            raise StorageError(
                f"{name}: bitmap sets need declared dense integer domains for every column"
            )
        if not bitmap_fits(ranges):
            raise StorageError(f"{name}: declared domains too large for a bitmap set")
    return make_set(arity, impl, name=name, ranges=ranges, fixed_buckets=fixed_buckets)


class EdbStore:
    """EDB descriptor structures; the loader's population target."""

    def __init__(self, descriptors, domains: ColumnDomains, set_impl: str = "auto",
                 fixed_buckets: int = 1 << 20):
        self.descriptors = list(descriptors)
        self.domains = domains
        self.set_impl = set_impl
        self.fixed_buckets = fixed_buckets
        self.structures: dict[str, object] = {
            d.name: self._build(d) for d in self.descriptors
        }

    def _build(self, desc: EdbDescriptor):
        positions = [(desc.pred, c) for c in desc.retained]
        if desc.kind == "list":
            return ListRelation(len(desc.retained), name=desc.name)
        if desc.kind == "set":
            return build_set(
                len(desc.retained), ranges_for(self.domains, positions),
                desc.name, self.set_impl, self.fixed_buckets,
            )
        dense = None
        if len(desc.key_cols) == 1:
            dense = self.domains.int_range((desc.pred, desc.key_cols[0]))
        return MapRelation(
            len(desc.key_cols), len(desc.out_cols), name=desc.name, dense_key_range=dense
        )
