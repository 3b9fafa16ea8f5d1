"""First-order structures for CQA, their Gaifman graphs, and the MSO sentence as text.

The structure has the facts as its domain, a relation ``depfails`` listing
conflicting facts, and one binary relation ``linked_l_i_j`` per pair of
linked atoms ``(i, j)`` of disjunct ``l``.  Atom indices are 0-based in the
API and 1-based in emitted formula text.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import networkx as nx

from .errors import SizeGuardError
from .hypergraphs import build_solution_conflict, minimal_conflicts, primal_graph
from .relational import (
    DC,
    Constraint,
    Disjunct,
    Fact,
    Query,
    _fact_set,
    constraint_atom_count,
    unify,
)
from .treedec import decompose, exact_treewidth

LinkIndex = FrozenSet[Tuple[int, int]]


def q_linked(d: Disjunct) -> LinkIndex:
    """Pairs of atom indices that are equal, share a variable, or are bridged by an inequality."""
    atoms = d.atoms
    out = set()
    for i, a in enumerate(atoms):
        for j, b in enumerate(atoms):
            va, vb = a.variables(), b.variables()
            if i == j or va & vb:
                out.add((i, j))
                continue
            for c in d.inequalities:
                if c.variables() == {c.left, c.right} and (
                    (c.left in va and c.right in vb) or (c.right in va and c.left in vb)
                ):
                    out.add((i, j))
                    break
    return frozenset(out)


def _bound_inequalities_hold(d: Disjunct, h) -> bool:
    for c in d.inequalities:
        if c.variables() <= h.keys() and not c.holds(h):
            return False
    return True


def q_consistent(fi: Fact, fj: Fact, d: Disjunct, i: int, j: int) -> bool:
    """Whether one assignment maps atom i onto ``fi`` and atom j onto ``fj``.

    Inequalities are checked when every variable in them is bound by the
    two atoms.
    """
    if (i, j) not in q_linked(d):
        return False
    h = unify(d.atoms[i], fi, {})
    if h is None:
        return False
    h = unify(d.atoms[j], fj, h)
    if h is None:
        return False
    return _bound_inequalities_hold(d, h)


def depfails_arity(constraints: Iterable[Constraint]) -> Tuple[str, int]:
    """("fd", 2) when every constraint is an FD or key, else ("dc", max atoms)."""
    constraints = list(constraints)
    if all(not isinstance(c, DC) for c in constraints):
        return "fd", 2
    return "dc", max(constraint_atom_count(c) for c in constraints)


@dataclass(frozen=True)
class GaifmanStructure:
    domain: Tuple[Fact, ...]
    kind: str
    arity: int
    depfails: FrozenSet[Tuple[Fact, ...]]
    linked: Dict[Tuple[int, int, int], FrozenSet[Tuple[Fact, Fact]]]

    def relation_sizes(self) -> Dict[str, int]:
        out = {"depfails": len(self.depfails)}
        for (l, i, j), pairs in sorted(self.linked.items()):
            out[_linked_name(l, i, j)] = len(pairs)
        return out


def _linked_name(l: int, i: int, j: int) -> str:
    return f"linked_{l + 1}_{i + 1}_{j + 1}"


def build_structure(db, constraints, q: Query) -> GaifmanStructure:
    constraints = list(constraints)
    facts = sorted(_fact_set(db))
    kind, k = depfails_arity(constraints)
    depfails = set()
    for e in minimal_conflicts(facts, constraints):
        members = sorted(e)
        # every k-tuple listing exactly the facts of a minimal conflict
        for t in product(members, repeat=k):
            if len(set(t)) == len(members):
                depfails.add(t)
    linked: Dict[Tuple[int, int, int], FrozenSet[Tuple[Fact, Fact]]] = {}
    for l, d in enumerate(q.disjuncts):
        cand: List[List[Fact]] = []
        for i, a in enumerate(d.atoms):
            cand.append([f for f in facts if (h := unify(a, f, {})) is not None
                         and _bound_inequalities_hold(d, h)])
        for i, j in sorted(q_linked(d)):
            linked[(l, i, j)] = frozenset(
                (f, g) for f in cand[i] for g in cand[j] if q_consistent(f, g, d, i, j))
    return GaifmanStructure(tuple(facts), kind, k, frozenset(depfails), linked)


def gaifman_graph(S: GaifmanStructure) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(S.domain)
    for t in S.depfails:
        ds = sorted(set(t))
        for a, u in enumerate(ds):
            for v in ds[a + 1:]:
                g.add_edge(u, v)
    for pairs in S.linked.values():
        for f, h in pairs:
            if f != h:
                g.add_edge(f, h)
    return g


# --- MSO text --------------------------------------------------------------

def _nest(quant: str, names: List[str], body: str) -> str:
    for x in reversed(names):
        body = f"({quant} {x} {body})"
    return body


def emit_mso(kind: str, q: Query, k: int = 2) -> str:
    """The MSO sentence saying every repair satisfies ``q``, as S-expressions.

    ``kind`` is "fd" (binary depfails, sentence named Phi) or "dc" (k-ary
    depfails, sentence named Psi).  The text depends on ``q`` and ``k`` only.
    """
    if kind == "fd":
        k = 2
    elif kind != "dc":
        raise ValueError(f"kind must be 'fd' or 'dc', not {kind!r}")
    xs = [f"x{i}" for i in range(1, k + 1)]
    members = " ".join(f"(T {x})" for x in xs)
    lines = [f";; depfails/{k}"]
    lines.append(
        "(define (phi-sat T) "
        + _nest("forall", xs, f"(-> (and {members}) (not (depfails {' '.join(xs)})))") + ")")
    lines.append(
        "(define (phi-supset T U) "
        "(and (forall x (-> (T x) (U x))) (exists y (and (not (T y)) (U y)))))")
    lines.append(
        "(define (phi-repair T) "
        "(and (phi-sat T) (forall-set U (or (not (phi-supset T U)) (not (phi-sat U))))))")
    calls = []
    for l, d in enumerate(q.disjuncts):
        vs = [f"x{i + 1}" for i in range(len(d.atoms))]
        parts = [f"(T {v})" for v in vs]
        parts += [f"({_linked_name(l, i, j)} x{i + 1} x{j + 1})" for i, j in sorted(q_linked(d))]
        lines.append(f"(define (phi-qsat-{l + 1} T) " + _nest("exists", vs, f"(and {' '.join(parts)})") + ")")
        calls.append(f"(phi-qsat-{l + 1} T)")
    name = "Phi" if kind == "fd" else "Psi"
    disj = f"(or {' '.join(calls)})" if calls else "(or)"
    lines.append(f"(define {name} (forall-set T (-> (phi-repair T) {disj})))")
    return "\n".join(lines) + "\n"


def mso_for(constraints, q: Query) -> str:
    kind, k = depfails_arity(constraints)
    return emit_mso(kind, q, k)


# --- treewidth comparison --------------------------------------------------

@dataclass(frozen=True)
class TwMeasures:
    tw_h_upper: int
    tw_g_upper: int
    tw_h_exact: Optional[int]
    tw_g_exact: Optional[int]


def _exact_or_none(g: nx.Graph, limit: int) -> Optional[int]:
    try:
        return exact_treewidth(g, limit)
    except SizeGuardError:
        return None


def tw_measures(db, constraints, q: Query, heuristic: str = "min-fill", exact_max: int = 12) -> TwMeasures:
    """Heuristic (and, when small enough, exact) widths of both graph representations."""
    constraints = list(constraints)
    H = build_solution_conflict(db, constraints, q)
    G = gaifman_graph(build_structure(db, constraints, q))
    ph = primal_graph(H)
    return TwMeasures(
        tw_h_upper=decompose(H, heuristic).width,
        tw_g_upper=decompose(G, heuristic).width,
        tw_h_exact=_exact_or_none(ph, exact_max),
        tw_g_exact=_exact_or_none(G, exact_max),
    )
