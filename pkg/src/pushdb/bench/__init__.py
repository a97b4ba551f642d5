from .fixtures import FIXTURES, fixture_program, fixture_tc_bf, fixture_text
from .generators import (
    JOIN1_EDB,
    SplitMix64,
    gen_eav,
    gen_join1,
    gen_pe_stress_facts,
    gen_pe_stress_program,
    gen_tc,
    sidecar_path_for,
    write_domains_sidecar,
)
from .runner import BenchReport, run_benchmark

__all__ = [
    "BenchReport",
    "FIXTURES",
    "JOIN1_EDB",
    "SplitMix64",
    "fixture_program",
    "fixture_tc_bf",
    "fixture_text",
    "gen_eav",
    "gen_join1",
    "gen_pe_stress_facts",
    "gen_pe_stress_program",
    "gen_tc",
    "run_benchmark",
    "sidecar_path_for",
    "write_domains_sidecar",
]
