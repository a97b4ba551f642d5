from .lists import INT_WIDTH, PAGE_BYTES, ListRelation
from .maps import MapRelation
from .memory import MemoryEntry, MemoryReport, StructureRegistry, memory_report
from .sets import BitmapSet, DynamicHashSet, FixedHashSet, make_set
from .strings import StringTable

__all__ = [
    "BitmapSet",
    "DynamicHashSet",
    "FixedHashSet",
    "INT_WIDTH",
    "ListRelation",
    "MapRelation",
    "MemoryEntry",
    "MemoryReport",
    "PAGE_BYTES",
    "StringTable",
    "StructureRegistry",
    "make_set",
    "memory_report",
]
