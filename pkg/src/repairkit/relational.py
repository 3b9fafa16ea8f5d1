"""Relational core: terms, facts, databases, queries, constraints.

Everything here is immutable.  Facts are ordered by ``(relation, values)``
and that order is the canonical order used for bag bitmasks, child
ordering and printed output throughout the package.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterable, Iterator, List, Optional, Tuple, Union

from .errors import NotPrimaryKeyError, SchemaError, UnsafeVariableError


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self) -> str:
        return "?" + self.name


# constants are plain strings
Term = Union[Var, str]


def is_var(t: Term) -> bool:
    return isinstance(t, Var)


def term_str(t: Term) -> str:
    return str(t)


@dataclass(frozen=True, order=True)
class Fact:
    relation: str
    values: Tuple[str, ...]

    @property
    def arity(self) -> int:
        return len(self.values)

    def __str__(self) -> str:
        return f"{self.relation}({','.join(self.values)})"

    __repr__ = __str__


def fact(relation: str, *values: str) -> Fact:
    return Fact(relation, tuple(str(v) for v in values))


@dataclass(frozen=True)
class Atom:
    relation: str
    terms: Tuple[Term, ...]

    @property
    def arity(self) -> int:
        return len(self.terms)

    def variables(self) -> frozenset:
        return frozenset(t for t in self.terms if isinstance(t, Var))

    def constants(self) -> frozenset:
        return frozenset(t for t in self.terms if not isinstance(t, Var))

    def __str__(self) -> str:
        return f"{self.relation}({','.join(map(str, self.terms))})"


@dataclass(frozen=True)
class Comparison:
    """``left != right`` (``negated``) or ``left = right``."""

    left: Term
    right: Term
    negated: bool = True

    def variables(self) -> frozenset:
        return frozenset(t for t in (self.left, self.right) if isinstance(t, Var))

    def holds(self, assignment: Dict[Var, str]) -> bool:
        a = assignment.get(self.left, self.left) if isinstance(self.left, Var) else self.left
        b = assignment.get(self.right, self.right) if isinstance(self.right, Var) else self.right
        return (a != b) if self.negated else (a == b)

    def __str__(self) -> str:
        op = "!=" if self.negated else "="
        return f"{self.left} {op} {self.right}"


def _check_safe(atoms: Iterable[Atom], comparisons: Iterable[Comparison], what: str) -> None:
    bound = set()
    for a in atoms:
        bound |= a.variables()
    for c in comparisons:
        missing = c.variables() - bound
        if missing:
            names = ", ".join(sorted(map(str, missing)))
            raise UnsafeVariableError(f"{what}: variable {names} in '{c}' occurs in no relational atom")


@dataclass(frozen=True)
class Disjunct:
    """One conjunctive query with inequalities; variables are existential."""

    atoms: Tuple[Atom, ...]
    inequalities: Tuple[Comparison, ...] = ()
    line: Optional[int] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.atoms:
            raise SchemaError("a query disjunct needs at least one relational atom", self.line)
        for c in self.inequalities:
            if not c.negated:
                raise SchemaError("queries admit inequality atoms only", self.line)
            if not c.variables():
                raise SchemaError(f"inequality '{c}' mentions no variable", self.line)
        _check_safe(self.atoms, self.inequalities, "query")

    def variables(self) -> frozenset:
        out = set()
        for a in self.atoms:
            out |= a.variables()
        return frozenset(out)

    def constants(self) -> frozenset:
        out = set()
        for a in self.atoms:
            out |= a.constants()
        for c in self.inequalities:
            out |= {t for t in (c.left, c.right) if not isinstance(t, Var)}
        return frozenset(out)

    def __str__(self) -> str:
        return ", ".join([str(a) for a in self.atoms] + [str(c) for c in self.inequalities])


@dataclass(frozen=True)
class Query:
    """A union of conjunctive queries with inequalities.

    An empty disjunct tuple is the identically false query; use
    :meth:`false` to build it.
    """

    disjuncts: Tuple[Disjunct, ...]

    @classmethod
    def false(cls) -> "Query":
        return cls(())

    @classmethod
    def of(cls, *disjuncts: Disjunct) -> "Query":
        return cls(tuple(disjuncts))

    @property
    def is_false(self) -> bool:
        return not self.disjuncts

    def atom_count(self) -> int:
        """Number of relational and inequality atoms over all disjuncts."""
        return sum(len(d.atoms) + len(d.inequalities) for d in self.disjuncts)

    def max_disjunct_atoms(self) -> int:
        return max((len(d.atoms) for d in self.disjuncts), default=0)

    def __or__(self, other: "Query") -> "Query":
        return Query(self.disjuncts + other.disjuncts)

    def __str__(self) -> str:
        if self.is_false:
            return "false"
        return " | ".join(str(d) for d in self.disjuncts)


FALSE = Query.false()


# --- constraints -----------------------------------------------------------

@dataclass(frozen=True)
class FD:
    """Functional dependency ``relation : lhs -> rhs`` over 1-based positions."""

    relation: str
    lhs: frozenset
    rhs: frozenset
    line: Optional[int] = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        lhs = _pos(self.lhs)
        return f"fd {self.relation} : {lhs + ' ' if lhs else ''}-> {_pos(self.rhs)}".rstrip()


@dataclass(frozen=True)
class Key:
    """Key ``relation : positions``; stands for the FD onto all positions."""

    relation: str
    positions: frozenset
    line: Optional[int] = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return f"key {self.relation} : {_pos(self.positions)}".rstrip()


@dataclass(frozen=True)
class DC:
    """Denial constraint: no assignment makes every body item true."""

    body: Tuple[Union[Atom, Comparison], ...]
    line: Optional[int] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.atoms:
            raise SchemaError("a denial constraint needs at least one relational atom", self.line)
        try:
            _check_safe(self.atoms, self.comparisons, "denial constraint")
        except UnsafeVariableError as e:
            raise UnsafeVariableError(e.message, self.line) from None

    @property
    def atoms(self) -> Tuple[Atom, ...]:
        return tuple(b for b in self.body if isinstance(b, Atom))

    @property
    def comparisons(self) -> Tuple[Comparison, ...]:
        return tuple(b for b in self.body if isinstance(b, Comparison))

    def __str__(self) -> str:
        return "dc : " + ", ".join(map(str, self.body))


Constraint = Union[FD, Key, DC]


def _pos(ps: Iterable[int]) -> str:
    return " ".join(str(p) for p in sorted(ps))


def key(relation: str, *positions: int) -> Key:
    return Key(relation, frozenset(positions))


def fd(relation: str, lhs: Iterable[int], rhs: Iterable[int]) -> FD:
    return FD(relation, frozenset(lhs), frozenset(rhs))


def constraint_atom_count(c: Constraint) -> int:
    """Relational atoms of ``c`` written as a denial constraint."""
    if isinstance(c, DC):
        return len(c.atoms)
    return 2


def check_constraint_schema(constraints: Iterable[Constraint], arities: Dict[str, int]) -> None:
    """Raise SchemaError for positions or atoms that do not fit ``arities``."""
    for c in constraints:
        if isinstance(c, (FD, Key)):
            ar = arities.get(c.relation)
            if ar is None:
                continue
            used = c.positions if isinstance(c, Key) else c.lhs | c.rhs
            bad = [p for p in sorted(used) if not 1 <= p <= ar]
            if bad:
                raise SchemaError(f"'{c}': position {bad[0]} outside 1..{ar} for {c.relation}", c.line)
        else:
            for a in c.atoms:
                ar = arities.get(a.relation)
                if ar is not None and ar != a.arity:
                    raise SchemaError(f"'{c}': {a.relation} has arity {ar}, atom uses {a.arity}", c.line)


def check_query_schema(q: Query, arities: Dict[str, int]) -> None:
    for d in q.disjuncts:
        for a in d.atoms:
            ar = arities.get(a.relation)
            if ar is not None and ar != a.arity:
                raise SchemaError(f"query atom {a}: {a.relation} has arity {ar}", d.line)


# --- databases -------------------------------------------------------------

class Database:
    """A finite set of facts with a consistent arity per relation."""

    __slots__ = ("facts", "arities", "_sorted")

    def __init__(self, facts: Iterable[Fact] = ()):
        fs = frozenset(facts)
        arities: Dict[str, int] = {}
        for f in sorted(fs):
            ar = arities.setdefault(f.relation, f.arity)
            if ar != f.arity:
                raise SchemaError(f"{f}: {f.relation} has arity {ar}")
        self.facts = fs
        self.arities = arities
        self._sorted = tuple(sorted(fs))

    @property
    def adom(self) -> frozenset:
        return frozenset(v for f in self.facts for v in f.values)

    def sorted(self) -> Tuple[Fact, ...]:
        return self._sorted

    def __iter__(self) -> Iterator[Fact]:
        return iter(self._sorted)

    def __len__(self) -> int:
        return len(self.facts)

    def __contains__(self, f: object) -> bool:
        return f in self.facts

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Database):
            return self.facts == other.facts
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.facts)

    def __repr__(self) -> str:
        return "Database({" + ", ".join(map(str, self._sorted)) + "})"


def _fact_set(facts) -> frozenset:
    if isinstance(facts, Database):
        return facts.facts
    return frozenset(facts)


# --- matching --------------------------------------------------------------

class FactIndex:
    """Lookup of facts by relation and by (relation, position, value)."""

    def __init__(self, facts: Iterable[Fact]):
        self.by_relation: Dict[str, List[Fact]] = defaultdict(list)
        self.by_value: Dict[tuple, List[Fact]] = defaultdict(list)
        for f in sorted(facts):
            self.by_relation[f.relation].append(f)
            for i, v in enumerate(f.values):
                self.by_value[(f.relation, i, v)].append(f)

    def candidates(self, atom: Atom, assignment: Dict[Var, str]) -> List[Fact]:
        best = None
        for i, t in enumerate(atom.terms):
            v = assignment.get(t) if isinstance(t, Var) else t
            if v is not None:
                hits = self.by_value.get((atom.relation, i, v), [])
                if best is None or len(hits) < len(best):
                    best = hits
                    if not best:
                        break
        if best is None:
            best = self.by_relation.get(atom.relation, [])
        return best


def unify(atom: Atom, f: Fact, assignment: Dict[Var, str]) -> Optional[Dict[Var, str]]:
    """Extend ``assignment`` so that ``atom`` maps onto ``f``, or return None."""
    if atom.relation != f.relation or atom.arity != f.arity:
        return None
    out = None
    for t, v in zip(atom.terms, f.values):
        if isinstance(t, Var):
            cur = assignment.get(t) if out is None else out.get(t)
            if cur is None:
                if out is None:
                    out = dict(assignment)
                out[t] = v
            elif cur != v:
                return None
        elif t != v:
            return None
    return dict(assignment) if out is None else out


def homomorphisms(
    atoms: Tuple[Atom, ...],
    comparisons: Tuple[Comparison, ...],
    index: FactIndex,
    assignment: Optional[Dict[Var, str]] = None,
) -> Iterator[Tuple[Dict[Var, str], Tuple[Fact, ...]]]:
    """Yield every assignment mapping ``atoms`` into the index, with the image facts.

    Comparisons are checked as soon as all of their variables are bound.
    """
    start = dict(assignment or {})
    # step at which each comparison becomes fully bound
    bound = set(start)
    due: List[List[Comparison]] = [[] for _ in range(len(atoms) + 1)]
    pending = list(comparisons)
    for c in list(pending):
        if c.variables() <= bound:
            due[0].append(c)
            pending.remove(c)
    for k, a in enumerate(atoms, 1):
        bound |= a.variables()
        for c in list(pending):
            if c.variables() <= bound:
                due[k].append(c)
                pending.remove(c)
    if pending:
        raise UnsafeVariableError(f"unbound variable in '{pending[0]}'")
    if not all(c.holds(start) for c in due[0]):
        return

    image: List[Fact] = []

    def rec(k: int, h: Dict[Var, str]):
        if k == len(atoms):
            yield h, tuple(image)
            return
        atom = atoms[k]
        for f in index.candidates(atom, h):
            h2 = unify(atom, f, h)
            if h2 is None:
                continue
            if not all(c.holds(h2) for c in due[k + 1]):
                continue
            image.append(f)
            yield from rec(k + 1, h2)
            image.pop()

    yield from rec(0, start)


# --- evaluation ------------------------------------------------------------

def evaluate_query(db, q: Query) -> bool:
    """Whether the fact set ``db`` satisfies the Boolean query ``q``."""
    if q.is_false:
        return False
    facts = _fact_set(db)
    arities = db.arities if isinstance(db, Database) else {f.relation: f.arity for f in facts}
    check_query_schema(q, arities)
    index = FactIndex(facts)
    for d in q.disjuncts:
        for _ in homomorphisms(d.atoms, d.inequalities, index):
            return True
    return False


def _fd_violations(facts: Iterable[Fact], relation: str, lhs: frozenset, rhs: Optional[frozenset]):
    """Pairs of facts agreeing on ``lhs`` and disagreeing on ``rhs``.

    ``rhs=None`` means every position (the key case).
    """
    lhs_idx = sorted(p - 1 for p in lhs)
    groups: Dict[tuple, Dict[tuple, List[Fact]]] = defaultdict(lambda: defaultdict(list))
    for f in facts:
        if f.relation != relation:
            continue
        top = max(list(lhs) + list(rhs or ()), default=0)
        if top > f.arity:
            raise SchemaError(f"position {top} outside 1..{f.arity} for {relation}")
        if rhs is None:
            rhs_key = f.values
        else:
            rhs_key = tuple(f.values[p - 1] for p in sorted(rhs))
        groups[tuple(f.values[i] for i in lhs_idx)][rhs_key].append(f)
    for sub in groups.values():
        if len(sub) < 2:
            continue
        parts = [sub[k] for k in sorted(sub)]
        for a, b in combinations(range(len(parts)), 2):
            for f in parts[a]:
                for g in parts[b]:
                    yield frozenset((f, g))


def violations(facts, c: Constraint, index: Optional[FactIndex] = None) -> Iterator[frozenset]:
    """Fact sets (images of ``c``'s body) that violate ``c``; not necessarily minimal."""
    fs = _fact_set(facts)
    if isinstance(c, FD):
        yield from _fd_violations(fs, c.relation, c.lhs, c.rhs)
    elif isinstance(c, Key):
        yield from _fd_violations(fs, c.relation, c.positions, None)
    else:
        index = index or FactIndex(fs)
        for _, image in homomorphisms(c.atoms, c.comparisons, index):
            yield frozenset(image)


def satisfies_constraints(s, constraints: Iterable[Constraint]) -> bool:
    """Whether the fact set ``s`` violates none of ``constraints``."""
    fs = _fact_set(s)
    index = None
    for c in constraints:
        if isinstance(c, DC) and index is None:
            index = FactIndex(fs)
        for _ in violations(fs, c, index):
            return False
    return True


def key_blocks(db, keys: Iterable[Key]) -> List[frozenset]:
    """Partition ``db`` into blocks of key-equal facts.

    Facts of relations without a key form singleton blocks.
    """
    pk: Dict[str, Key] = {}
    for k in keys:
        if not isinstance(k, Key):
            raise NotPrimaryKeyError(f"'{k}' is not a key")
        prev = pk.setdefault(k.relation, k)
        if prev != k:
            raise NotPrimaryKeyError(f"relation {k.relation} has two keys: '{prev}' and '{k}'")
    blocks: Dict[tuple, List[Fact]] = defaultdict(list)
    for f in sorted(_fact_set(db)):
        k = pk.get(f.relation)
        if k is None:
            blocks[(f.relation, "*", f.values)].append(f)
        else:
            if any(p > f.arity for p in k.positions):
                raise SchemaError(f"'{k}' exceeds arity of {f}")
            blocks[(f.relation, "", tuple(f.values[p - 1] for p in sorted(k.positions)))].append(f)
    return sorted((frozenset(b) for b in blocks.values()), key=lambda b: sorted(b))
