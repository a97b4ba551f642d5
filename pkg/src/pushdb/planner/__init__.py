from .bindings import access_pattern_for_atom, analyze_bindings, pattern_for_atom
from .columns import ColumnDomains, DomainDeclarations
from .facttypes import (
    AppSkeleton,
    ExplosionSignal,
    FactTypeResult,
    FactTypeSpec,
    compute_fact_types_pe,
    compute_fact_types_simple,
    default_guard,
)
from .normalize import NormalizedProgram, NormRule, TempRelation, normalize_rules
from .plan import AnswerSpec, AppSpec, FactTypeInfo, ProbeSpec, PushPlan, build_plan, compile_plan
from .specialize import DescriptorSet, EdbDescriptor, specialize_edb

__all__ = [
    "AnswerSpec",
    "AppSkeleton",
    "AppSpec",
    "ColumnDomains",
    "DescriptorSet",
    "DomainDeclarations",
    "EdbDescriptor",
    "ExplosionSignal",
    "FactTypeInfo",
    "FactTypeResult",
    "FactTypeSpec",
    "NormRule",
    "NormalizedProgram",
    "ProbeSpec",
    "PushPlan",
    "TempRelation",
    "access_pattern_for_atom",
    "analyze_bindings",
    "build_plan",
    "compile_plan",
    "compute_fact_types_pe",
    "compute_fact_types_simple",
    "default_guard",
    "normalize_rules",
    "pattern_for_atom",
    "specialize_edb",
]
