"""Brute-force ground truth for repair counting.

Nothing here touches the hypergraph or decomposition code paths except
:func:`check_mis_correspondence`, whose whole point is to compare the two.
"""

from __future__ import annotations

from typing import Iterable, List, Tuple

from .errors import SizeGuardError
from .hypergraphs import build_conflict
from .relational import Constraint, Query, _fact_set, evaluate_query, satisfies_constraints

DEFAULT_LIMIT = 20


def _guard(n: int, limit: int):
    if n > limit:
        raise SizeGuardError(f"{n} facts exceed the brute-force limit {limit}")


def enumerate_repairs(db, constraints: Iterable[Constraint], limit: int = DEFAULT_LIMIT) -> List[frozenset]:
    """All subset-maximal consistent subsets of ``db``, canonically ordered.

    Facts are decided in canonical order.  Including a fact requires the
    partial set to stay consistent; excluding one is only pursued while it
    can still be blocked by the facts not yet decided (inconsistency is
    upward closed, so a fact that is consistent with everything still
    available can never be blocked).
    """
    facts = sorted(_fact_set(db))
    _guard(len(facts), limit)
    constraints = list(constraints)
    ok = lambda s: satisfies_constraints(s, constraints)
    out: List[frozenset] = []

    def rec(i: int, chosen: frozenset, excluded: Tuple):
        if i == len(facts):
            if all(not ok(chosen | {a}) for a in excluded):
                out.append(chosen)
            return
        f = facts[i]
        if ok(chosen | {f}):
            rec(i + 1, chosen | {f}, excluded)
        if not ok(chosen.union(facts[i:])):
            rec(i + 1, chosen, excluded + (f,))

    rec(0, frozenset(), ())
    return sorted(out, key=lambda r: sorted(r))


def oracle_counts(db, constraints, q: Query, limit: int = DEFAULT_LIMIT) -> Tuple[int, int, int]:
    """(total, falsifying, satisfying) repair counts by enumeration."""
    repairs = enumerate_repairs(db, constraints, limit)
    sat = sum(1 for r in repairs if evaluate_query(r, q))
    return len(repairs), len(repairs) - sat, sat


def maximal_independent_sets(H, limit: int = DEFAULT_LIMIT) -> List[frozenset]:
    """Every maximal node set of H containing no hyperedge, by scanning all subsets."""
    nodes = list(H.nodes)
    n = len(nodes)
    _guard(n, limit)
    pos = {v: i for i, v in enumerate(nodes)}
    edges = []
    for e in H.hyperedges():
        m = 0
        for v in e:
            m |= 1 << pos[v]
        edges.append(m)
    independent = lambda S: all(e & S != e for e in edges)
    out = []
    for S in range(1 << n):
        if not independent(S):
            continue
        if all(S >> v & 1 or not independent(S | 1 << v) for v in range(n)):
            out.append(frozenset(nodes[i] for i in range(n) if S >> i & 1))
    return sorted(out, key=lambda r: sorted(r))


def check_mis_correspondence(db, constraints, limit: int = DEFAULT_LIMIT) -> bool:
    """Whether the repairs are exactly the maximal independent sets of the conflict hypergraph."""
    constraints = list(constraints)
    repairs = set(enumerate_repairs(db, constraints, limit))
    mis = set(maximal_independent_sets(build_conflict(db, constraints), limit))
    return repairs == mis
