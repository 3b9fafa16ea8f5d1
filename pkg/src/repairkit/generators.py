"""Instance families and seeded random instances."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .relational import (
    DC,
    FD,
    Atom,
    Comparison,
    Constraint,
    Database,
    Disjunct,
    Fact,
    Key,
    Query,
    Var,
)

Instance = Tuple[Database, List[Constraint], Query]

FAMILIES = ("bipartite", "chain", "path", "random")
CONSTRAINT_KINDS = ("pk", "fd", "dc", "mixed")


def gen_bipartite(n: int) -> Instance:
    """R(1..n), S(1..n), no constraints, query R(?x), S(?y): solution graph K_{n,n}."""
    if n < 1:
        raise ValueError("n must be positive")
    facts = [Fact("R", (str(i),)) for i in range(1, n + 1)]
    facts += [Fact("S", (str(i),)) for i in range(1, n + 1)]
    q = Query.of(Disjunct((Atom("R", (Var("x"),)), Atom("S", (Var("y"),)))))
    return Database(facts), [], q


def gen_chain(n: int) -> Instance:
    """R(i,*), S(*,i), T(negi), no constraints, query R(?x,?y), S(?y,?z), T(?z).

    The query has no solution, yet R- and S-facts pair up through ``*``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    facts = [Fact("R", (str(i), "*")) for i in range(1, n + 1)]
    facts += [Fact("S", ("*", str(i))) for i in range(1, n + 1)]
    facts += [Fact("T", (f"neg{i}",)) for i in range(1, n + 1)]
    x, y, z = Var("x"), Var("y"), Var("z")
    q = Query.of(Disjunct((Atom("R", (x, y)), Atom("S", (y, z)), Atom("T", (z,)))))
    return Database(facts), [], q


def gen_path(N: int, constants: Optional[Sequence[str]] = None) -> Tuple[Database, List[Constraint]]:
    """N facts whose conflict graph under keys R:1 and R:2 is a path.

    With constants a..f and N = 5 this is R(a,b), R(c,b), R(c,d), R(e,d), R(e,f).
    """
    if N < 1:
        raise ValueError("N must be positive")
    cs = list(constants) if constants is not None else [f"c{i}" for i in range(1, N + 2)]
    if len(cs) < N + 1:
        raise ValueError(f"need {N + 1} constants")
    facts = []
    for k in range(N):
        if k % 2 == 0:
            facts.append(Fact("R", (cs[k], cs[k + 1])))
        else:
            facts.append(Fact("R", (cs[k + 1], cs[k])))
    return Database(facts), [Key("R", frozenset({1})), Key("R", frozenset({2}))]


@dataclass(frozen=True)
class GenSpec:
    family: str = "random"
    n: int = 8
    constraint_kind: str = "fd"
    block_size: int = 3
    domain: int = 3
    max_atoms: int = 3
    max_disjuncts: int = 2
    inequalities: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        if self.constraint_kind not in CONSTRAINT_KINDS:
            raise ValueError(f"constraint_kind must be one of {CONSTRAINT_KINDS}")
        for name in ("n", "block_size", "domain", "max_atoms", "max_disjuncts"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


SCHEMA = {"R": 2, "S": 2, "T": 1}
VARS = [Var(v) for v in "xyzw"]


def _consts(k: int) -> List[str]:
    return [chr(ord("a") + i) for i in range(k)]


def _pk_facts(rng: random.Random, spec: GenSpec) -> List[Fact]:
    dom = _consts(spec.domain)
    facts: List[Fact] = []
    used_keys = set()
    attempts = 0
    while len(facts) < spec.n and attempts < 10 * spec.n:
        attempts += 1
        rel = rng.choice(["R", "S"])
        key_val = rng.choice(_consts(max(spec.domain, spec.n)))
        if (rel, key_val) in used_keys:
            continue
        used_keys.add((rel, key_val))
        size = min(rng.randint(1, spec.block_size), spec.n - len(facts), len(dom))
        for v in rng.sample(dom, size):
            facts.append(Fact(rel, (key_val, v)))
    return facts


def _random_facts(rng: random.Random, spec: GenSpec) -> List[Fact]:
    dom = _consts(spec.domain)
    seen = set()
    attempts = 0
    while len(seen) < spec.n and attempts < 20 * spec.n:
        attempts += 1
        rel = rng.choice(sorted(SCHEMA))
        seen.add(Fact(rel, tuple(rng.choice(dom) for _ in range(SCHEMA[rel]))))
    return sorted(seen)


def _random_fd(rng: random.Random) -> FD:
    rel = rng.choice(["R", "S"])
    lhs = rng.choice([{1}, {2}, set()] if rng.random() < 0.2 else [{1}, {2}])
    rhs = {1, 2} - lhs if lhs else {rng.choice([1, 2])}
    return FD(rel, frozenset(lhs), frozenset(rhs))


def _random_term(rng: random.Random, dom: List[str], pool: List[Var], const_p: float):
    if rng.random() < const_p:
        return rng.choice(dom)
    return rng.choice(pool)


def _random_atoms(rng: random.Random, k: int, dom: List[str], const_p: float,
                  relations: Sequence[str] = tuple(sorted(SCHEMA))) -> List[Atom]:
    atoms = []
    for _ in range(k):
        rel = rng.choice(relations)
        atoms.append(Atom(rel, tuple(_random_term(rng, dom, VARS[:3], const_p) for _ in range(SCHEMA[rel]))))
    return atoms


def _random_comparison(rng: random.Random, atoms: List[Atom], dom: List[str], negated: bool):
    vs = sorted(set().union(*(a.variables() for a in atoms)))
    if not vs:
        return None
    left = rng.choice(vs)
    right = rng.choice(vs + dom)
    if right == left:
        return None
    return Comparison(left, right, negated)


def _random_dc(rng: random.Random, spec: GenSpec) -> DC:
    dom = _consts(spec.domain)
    atoms = _random_atoms(rng, rng.randint(1, min(3, spec.max_atoms)), dom, 0.15)
    body: list = list(atoms)
    if rng.random() < 0.6:
        c = _random_comparison(rng, atoms, dom, negated=rng.random() < 0.7)
        if c is not None:
            body.append(c)
    if len(atoms) == 1 and len(body) == 1:
        # a lone unconstrained atom would delete a whole relation
        c = _random_comparison(rng, atoms, dom, negated=False)
        if c is not None:
            body.append(c)
    return DC(tuple(body))


def _random_query(rng: random.Random, spec: GenSpec, relations: Sequence[str]) -> Query:
    dom = _consts(spec.domain)
    disjuncts = []
    for _ in range(rng.randint(1, spec.max_disjuncts)):
        atoms = _random_atoms(rng, rng.randint(1, spec.max_atoms), dom, 0.2, relations)
        neqs = []
        if spec.inequalities and rng.random() < 0.5:
            c = _random_comparison(rng, atoms, dom, negated=True)
            if c is not None:
                neqs.append(c)
        disjuncts.append(Disjunct(tuple(atoms), tuple(neqs)))
    return Query(tuple(disjuncts))


def gen_random(spec: GenSpec) -> Instance:
    """A seeded random instance; the same GenSpec always yields the same instance."""
    rng = random.Random(spec.seed)
    kind = spec.constraint_kind
    if kind == "pk":
        facts = _pk_facts(rng, spec)
        constraints: List[Constraint] = [Key("R", frozenset({1})), Key("S", frozenset({1}))]
    else:
        facts = _random_facts(rng, spec)
        constraints = []
        if kind in ("fd", "mixed"):
            constraints += [_random_fd(rng) for _ in range(rng.randint(1, 2))]
        if kind in ("dc", "mixed"):
            constraints += [_random_dc(rng, spec) for _ in range(rng.randint(1, 2))]
        constraints = list(dict.fromkeys(constraints))
    relations = ("R", "S") if kind == "pk" else tuple(sorted(SCHEMA))
    return Database(facts), constraints, _random_query(rng, spec, relations)


def generate(spec: GenSpec) -> Instance:
    """Dispatch on ``spec.family``; path instances get the query R(c1,c2)."""
    if spec.family == "bipartite":
        return gen_bipartite(spec.n)
    if spec.family == "chain":
        return gen_chain(spec.n)
    if spec.family == "path":
        db, cs = gen_path(spec.n)
        first = min(db)
        return db, cs, Query.of(Disjunct((Atom(first.relation, first.values),)))
    return gen_random(spec)
