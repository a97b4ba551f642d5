"""Deterministic dataset and program generators.

All randomness comes from SplitMix64 with rejection sampling, so a given
(parameters, seed) pair produces byte-identical files on any platform.
Generated fact files ship with a ``<name>.domains.json`` sidecar declaring
the dense integer domain of each column; the planner uses those
declarations for bitmap sets and flexible-array maps.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from ..errors import CapacityError

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 (Steele et al.); fixed and portable across platforms."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) via rejection sampling (unbiased)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def randint(self, lo: int, hi: int) -> int:
        return lo + self.below(hi - lo + 1)


def write_domains_sidecar(path: str, domains: dict[str, list]) -> str:
    sidecar = path + ".domains.json"
    with open(sidecar, "w", encoding="utf-8") as fh:
        json.dump(domains, fh, indent=0, sort_keys=True)
        fh.write("\n")
    return sidecar


def sidecar_path_for(data_path: str) -> str:
    return data_path + ".domains.json"


JOIN1_EDB = ("c2", "c3", "c4", "d1", "d2")


def gen_join1(facts_per_relation: int, domain: int, seed: int, out_dir: str) -> list[str]:
    """Five fact files (c2, c3, c4, d1, d2), binary facts uniform in 1..domain.

    Duplicate rows are possible (sampling with replacement), matching the
    benchmark's list/map storage which keeps duplicates.
    """
    if facts_per_relation < 0 or domain < 1:
        raise CapacityError("facts_per_relation must be >= 0 and domain >= 1")
    os.makedirs(out_dir, exist_ok=True)
    rng = SplitMix64(seed)
    paths = []
    for name in JOIN1_EDB:
        path = os.path.join(out_dir, f"{name}.P")
        with open(path, "w", encoding="utf-8") as fh:
            for _ in range(facts_per_relation):
                a = rng.randint(1, domain)
                b = rng.randint(1, domain)
                fh.write(f"{name}({a},{b}).\n")
        write_domains_sidecar(path, {name: [[1, domain], [1, domain]]})
        paths.append(path)
    return paths


def gen_tc(edges: int, nodes: int, cyclic: bool, seed: int, out_path: str) -> str:
    """A ``par`` fact file with exactly `edges` distinct edges.

    Cyclic mode samples arbitrary ordered pairs (self-loops allowed);
    acyclic mode samples pairs (i, j) with i < j, so the graph cannot
    contain a cycle. Near the acyclic capacity bound the generator
    switches to a partial Fisher-Yates draw over the full pair set (still
    seed-deterministic) to avoid rejection stalls.
    """
    if edges < 0 or nodes < 1:
        raise CapacityError("edges must be >= 0 and nodes >= 1")
    capacity = nodes * nodes if cyclic else nodes * (nodes - 1) // 2
    if edges > capacity:
        kind = "cyclic" if cyclic else "acyclic"
        raise CapacityError(
            f"{edges} edges exceed the {kind} capacity of {capacity} for {nodes} nodes"
        )
    rng = SplitMix64(seed)
    pairs: list[tuple[int, int]]
    if edges > capacity // 2:
        universe = []
        if cyclic:
            for i in range(1, nodes + 1):
                for j in range(1, nodes + 1):
                    universe.append((i, j))
        else:
            for i in range(1, nodes + 1):
                for j in range(i + 1, nodes + 1):
                    universe.append((i, j))
        for k in range(edges):  # partial Fisher-Yates
            swap = k + rng.below(len(universe) - k)
            universe[k], universe[swap] = universe[swap], universe[k]
        pairs = universe[:edges]
    else:
        seen = set()
        pairs = []
        while len(pairs) < edges:
            i = rng.randint(1, nodes)
            j = rng.randint(1, nodes)
            if not cyclic:
                if i == j:
                    continue
                if i > j:
                    i, j = j, i
            if (i, j) in seen:
                continue
            seen.add((i, j))
            pairs.append((i, j))
    parent = os.path.dirname(out_path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as fh:
        for i, j in pairs:
            fh.write(f"par({i},{j}).\n")
    write_domains_sidecar(out_path, {"par": [[1, nodes], [1, nodes]]})
    return out_path


EAV_QUERY_ATTRIBUTES = ("title", "year", "author", "month")


def gen_eav(documents: int, seed: int, out_path: str) -> dict[str, int]:
    """Synthetic document/attribute/value file shaped like bibliography data.

    Every document gets a title and a year; 1..4 authors; a month for
    roughly a third of documents; plus attributes the standard query does
    not ask for (pages, url). Returns the exact per-attribute fact counts,
    for asserting loader routing.
    """
    rng = SplitMix64(seed)
    counts = {a: 0 for a in EAV_QUERY_ATTRIBUTES}
    counts["pages"] = 0
    counts["url"] = 0
    parent = os.path.dirname(out_path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as fh:
        for d in range(documents):
            doc = f"'doc{d:07d}x{rng.next_u64() & 0xFFFF:04x}'"
            fh.write(f"att({doc},title,'Title no. {d}, revision {rng.below(10)}').\n")
            counts["title"] += 1
            fh.write(f"att({doc},year,{rng.randint(1970, 2016)}).\n")
            counts["year"] += 1
            for a in range(1 + rng.below(4)):
                fh.write(f"att({doc},author,'author {rng.below(documents)}').\n")
                counts["author"] += 1
            if rng.below(3) == 0:
                fh.write(f"att({doc},month,'{rng.randint(1, 12)}').\n")
                counts["month"] += 1
            if rng.below(2) == 0:
                fh.write(f"att({doc},pages,'{rng.randint(1, 900)}--{rng.randint(901, 999)}').\n")
                counts["pages"] += 1
            if rng.below(4) == 0:
                fh.write(f"att({doc},url,'http://example.org/{d}').\n")
                counts["url"] += 1
    with open(out_path + ".counts.json", "w", encoding="utf-8") as fh:
        json.dump(counts, fh, indent=0, sort_keys=True)
        fh.write("\n")
    return counts


def gen_pe_stress_program(predicates: int) -> str:
    """A single recursive clique whose PE fact types multiply constants.

    Rules form a cycle p0 -> p1 -> ... -> p0; each step swaps the carried
    value to the second position and injects a per-rule constant, so the
    abstract fixpoint keeps minting new constant pairs until the guard
    trips. All predicates sit in one clique.
    """
    if predicates < 2:
        raise CapacityError("need at least 2 predicates")
    lines = ["p0(X, X) :- e(X)."]
    for i in range(predicates):
        nxt = (i + 1) % predicates
        lines.append(f"p{nxt}(V, k{i}) :- p{i}(U, V).")
    lines.append("?- p0(X, Y).")
    return "\n".join(lines) + "\n"


def gen_pe_stress_facts(values: int) -> str:
    return "\n".join(f"e(v{i})." for i in range(values)) + "\n"
