"""Conflict and solution-conflict hypergraphs over the facts of a database."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Tuple

import networkx as nx

from .errors import SizeGuardError
from .relational import (
    DC,
    Constraint,
    Fact,
    FactIndex,
    Query,
    _fact_set,
    homomorphisms,
    violations,
)

CONFLICT = "conflict"
SOLUTION = "solution"


def _edge_key(e: frozenset):
    return (len(e), sorted(e))


def minimize(sets: Iterable[frozenset]) -> List[frozenset]:
    """Subset-minimal members of ``sets``, in canonical order."""
    kept: List[frozenset] = []
    by_fact: Dict[Fact, List[frozenset]] = defaultdict(list)
    for e in sorted(set(sets), key=_edge_key):
        dominated = False
        for f in e:
            for k in by_fact.get(f, ()):
                if k <= e:
                    dominated = True
                    break
            if dominated:
                break
        if dominated:
            continue
        kept.append(e)
        for f in e:
            by_fact[f].append(e)
    return kept


def minimal_conflicts(db, constraints: Iterable[Constraint]) -> List[frozenset]:
    """Subset-minimal fact sets violating ``constraints``."""
    facts = _fact_set(db)
    index = None
    images = set()
    for c in constraints:
        if isinstance(c, DC) and index is None:
            index = FactIndex(facts)
        images.update(violations(facts, c, index))
    return minimize(images)


def minimal_solutions(db, q: Query) -> List[frozenset]:
    """Subset-minimal fact sets satisfying ``q``; none for the false query."""
    if q.is_false:
        return []
    index = FactIndex(_fact_set(db))
    images = set()
    for d in q.disjuncts:
        for _, image in homomorphisms(d.atoms, d.inequalities, index):
            images.add(frozenset(image))
    return minimize(images)


@dataclass(frozen=True)
class LabeledHypergraph:
    nodes: Tuple[Fact, ...]
    conflicts: Tuple[frozenset, ...]
    solutions: Tuple[frozenset, ...] = ()

    @property
    def edges(self) -> List[Tuple[frozenset, str]]:
        return [(e, CONFLICT) for e in self.conflicts] + [(e, SOLUTION) for e in self.solutions]

    def hyperedges(self) -> List[frozenset]:
        return list(self.conflicts) + list(self.solutions)

    def stats(self) -> Dict[str, int]:
        return {
            "nodes": len(self.nodes),
            "conflict_edges": len(self.conflicts),
            "solution_edges": len(self.solutions),
        }


def build_conflict(db, constraints) -> LabeledHypergraph:
    return LabeledHypergraph(tuple(sorted(_fact_set(db))), tuple(minimal_conflicts(db, constraints)))


def build_solution_conflict(db, constraints, q: Query) -> LabeledHypergraph:
    """Conflict hypergraph extended with the minimal solutions of ``q``."""
    return LabeledHypergraph(
        tuple(sorted(_fact_set(db))),
        tuple(minimal_conflicts(db, constraints)),
        tuple(minimal_solutions(db, q)),
    )


def primal_graph(H) -> nx.Graph:
    """Graph on H's nodes joining every two nodes that share a hyperedge."""
    g = nx.Graph()
    g.add_nodes_from(H.nodes)
    for e in H.hyperedges():
        es = sorted(e)
        for i, u in enumerate(es):
            for v in es[i + 1:]:
                g.add_edge(u, v)
    return g


def max_independent_set_size(H, limit: int = 20) -> int:
    """Largest node set containing no hyperedge, by exhaustive branching."""
    nodes = list(H.nodes)
    n = len(nodes)
    if n > limit:
        raise SizeGuardError(f"{n} nodes exceed the independent-set limit {limit}")
    pos = {v: i for i, v in enumerate(nodes)}
    # edges grouped by their highest node, so each is checked once all members are decided
    closing: List[List[int]] = [[] for _ in range(n)]
    for e in H.hyperedges():
        mask = 0
        for v in e:
            mask |= 1 << pos[v]
        closing[mask.bit_length() - 1].append(mask)

    best = 0

    def rec(i: int, chosen: int, size: int):
        nonlocal best
        if size + (n - i) <= best:
            return
        if i == n:
            best = size
            return
        with_i = chosen | (1 << i)
        if all(e & with_i != e for e in closing[i]):
            rec(i + 1, with_i, size + 1)
        rec(i + 1, chosen, size)

    rec(0, 0, 0)
    return best


def to_dot(g: nx.Graph, name: str = "primal") -> str:
    lines = [f"graph {name} {{"]
    for v in sorted(g.nodes):
        lines.append(f'  "{v}";')
    for u, v in sorted(tuple(sorted(e)) for e in g.edges):
        lines.append(f'  "{u}" -- "{v}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
