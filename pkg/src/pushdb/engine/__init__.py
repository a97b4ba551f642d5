from .naive import execute_naive
from .runtime import (
    AnswerRelation,
    Database,
    ExecResult,
    ExecStats,
    execute,
    execute_nodedup,
    open_answers,
)
from .seminaive import SeminaivePlan, SeminaiveResult, execute_seminaive
from .store import EdbStore, build_set, ranges_for

__all__ = [
    "AnswerRelation",
    "Database",
    "EdbStore",
    "ExecResult",
    "ExecStats",
    "SeminaivePlan",
    "SeminaiveResult",
    "build_set",
    "execute",
    "execute_naive",
    "execute_nodedup",
    "execute_seminaive",
    "open_answers",
    "ranges_for",
]
