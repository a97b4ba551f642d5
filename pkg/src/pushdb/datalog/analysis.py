"""Program analysis: range restriction and the predicate dependency graph."""

from __future__ import annotations

from dataclasses import dataclass

from .terms import Pred, Program


def check_range_restriction(program: Program) -> list[tuple[int, str]]:
    """Return (rule index, variable name) for every unbound head variable.

    Empty iff every head variable occurs in the same rule's body. Each
    offending variable is reported once per rule, in head order.
    """
    violations: list[tuple[int, str]] = []
    for idx, rule in enumerate(program.rules):
        body_vars = rule.body_variables()
        for name in rule.head.variables():
            if name not in body_vars:
                violations.append((idx, name))
    return violations


@dataclass(frozen=True)
class PredicateGraph:
    """IDB dependency graph with strongly connected components.

    An edge (p, q) means q's rules use p in the body: q depends on p.
    ``cliques`` lists the SCCs in dependency order (for cliques Ci before
    Cj, nothing in Ci depends on anything in Cj). ``recursive`` holds the
    predicates in recursive cliques (multi-member SCC or self-loop).
    """

    nodes: tuple[Pred, ...]
    edges: tuple[tuple[Pred, Pred], ...]
    cliques: tuple[tuple[Pred, ...], ...]
    recursive: frozenset[Pred]

    def clique_index(self) -> dict[Pred, int]:
        return {p: i for i, clique in enumerate(self.cliques) for p in clique}


def build_predicate_graph(program: Program) -> PredicateGraph:
    nodes: list[Pred] = []
    seen = set()
    for rule in program.rules:
        if rule.head.pred not in seen:
            seen.add(rule.head.pred)
            nodes.append(rule.head.pred)

    edge_set: list[tuple[Pred, Pred]] = []
    deps: dict[Pred, list[Pred]] = {p: [] for p in nodes}
    edge_seen = set()
    for rule in program.rules:
        head = rule.head.pred
        for atom in rule.body:
            if atom.pred in seen:
                e = (atom.pred, head)
                if e not in edge_seen:
                    edge_seen.add(e)
                    edge_set.append(e)
                    deps[head].append(atom.pred)

    cliques = _tarjan_sccs(nodes, deps)
    recursive = set()
    for clique in cliques:
        if len(clique) > 1:
            recursive.update(clique)
        else:
            p = clique[0]
            if (p, p) in edge_seen:
                recursive.add(p)
    return PredicateGraph(tuple(nodes), tuple(edge_set), tuple(cliques), frozenset(recursive))


def _tarjan_sccs(nodes, succ):
    """Iterative Tarjan over edges head -> dependency.

    Tarjan emits an SCC only after every SCC reachable from it; with edges
    pointing at dependencies this is exactly dependency order (a clique is
    emitted after the cliques it depends on), no reversal needed.
    """
    index: dict = {}
    lowlink: dict = {}
    on_stack: set = set()
    stack: list = []
    sccs: list[tuple] = []
    counter = [0]

    for root in nodes:
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            node, child_i = work[-1]
            if child_i == 0:
                index[node] = lowlink[node] = counter[0]
                counter[0] += 1
                stack.append(node)
                on_stack.add(node)
            advanced = False
            children = succ[node]
            while child_i < len(children):
                child = children[child_i]
                child_i += 1
                if child not in index:
                    work[-1] = (node, child_i)
                    work.append((child, 0))
                    advanced = True
                    break
                if child in on_stack:
                    lowlink[node] = min(lowlink[node], index[child])
            if advanced:
                continue
            work.pop()
            if lowlink[node] == index[node]:
                scc = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    scc.append(w)
                    if w == node:
                        break
                scc.reverse()
                sccs.append(tuple(scc))
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
    return sccs
