"""Counting repairs that falsify a query by dynamic programming over a tree decomposition.

For a bag ``b`` and sets ``r ⊆ s ⊆ b`` the table ``f[b, j][(r, s)]`` counts
extensions of ``r`` into the subtrees of the first ``j`` children of ``b``
such that ``r`` plus the extension is a max-repair of ``s`` plus everything
below, and no bag sees a full solution edge.  ``g[b, c][(r, s)]`` is the
same count for a single child ``c`` with ``r ⊆ s ⊆ b ∩ c``.  Subsets of a
bag are bitmasks over the bag's facts in canonical order.

Summing ``f[root, all children][(r, root)]`` over ``r`` gives the number of
repairs in which no minimal solution survives, i.e. repairs falsifying the
query.  Running the same program with the false query counts all repairs.
"""

from __future__ import annotations

import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

from .errors import PreconditionError, SizeGuardError
from .hypergraphs import LabeledHypergraph, build_conflict, build_solution_conflict
from .relational import FALSE, Constraint, Fact, Query, _fact_set, satisfies_constraints
from .treedec import RootedDecomposition, check, decompose

MAX_BAG = 25

Table = Dict[Tuple[int, int], int]


# --- max-repairs -----------------------------------------------------------

def max_rep(r, d, constraints: Iterable[Constraint]) -> frozenset:
    """The unique set that ``r`` max-repairs inside ``d``.

    It is ``r`` plus every fact of ``d`` that is inconsistent together with ``r``.
    """
    r = frozenset(r)
    d = _fact_set(d)
    constraints = list(constraints)
    if not r <= d:
        raise PreconditionError("r is not a subset of d")
    if not satisfies_constraints(r, constraints):
        raise PreconditionError("r is inconsistent")
    return r | {a for a in d - r if not satisfies_constraints(r | {a}, constraints)}


def is_max_repair(r, s, b, constraints: Iterable[Constraint]) -> bool:
    r, s = frozenset(r), frozenset(s)
    constraints = list(constraints)
    if not satisfies_constraints(r, constraints):
        return False
    return max_rep(r, b, constraints) == s


# --- bag-local bookkeeping -------------------------------------------------

@dataclass
class BagInfo:
    facts: Tuple[Fact, ...]
    index: Dict[Fact, int]
    conflicts: List[int]
    solutions: List[int]

    def mask(self, factset) -> int:
        m = 0
        for f in factset:
            m |= 1 << self.index[f]
        return m

    def facts_of(self, mask: int) -> frozenset:
        return frozenset(f for i, f in enumerate(self.facts) if mask >> i & 1)

    @property
    def full(self) -> int:
        return (1 << len(self.facts)) - 1


def _bag_infos(H: LabeledHypergraph, T: RootedDecomposition) -> List[BagInfo]:
    incident: Dict[Fact, List[Tuple[frozenset, bool]]] = defaultdict(list)
    for e in H.conflicts:
        incident[min(e)].append((e, False))
    for e in H.solutions:
        incident[min(e)].append((e, True))
    infos = []
    for bag in T.bags:
        facts = tuple(sorted(bag))
        index = {f: i for i, f in enumerate(facts)}
        info = BagInfo(facts, index, [], [])
        for f in facts:
            for e, is_sol in incident.get(f, ()):
                if e <= bag:
                    (info.solutions if is_sol else info.conflicts).append(info.mask(e))
        infos.append(info)
    return infos


def _submasks(m: int):
    s = m
    while True:
        yield s
        if s == 0:
            return
        s = (s - 1) & m


def _base_table(info: BagInfo) -> Table:
    """f(r, s, b, ()) = 1 iff r is consistent, holds no solution edge, and max-repairs s in b."""
    full = info.full
    target: Dict[int, int] = {}
    for r in range(full + 1):
        if any(e & r == e for e in info.conflicts):
            continue
        if any(e & r == e for e in info.solutions):
            continue
        m = r
        for e in info.conflicts:
            d = e & ~r
            if d & (d - 1) == 0:
                m |= d
        target[r] = m
    table: Table = {}
    for s in range(full + 1):
        for r in _submasks(s):
            table[(r, s)] = 1 if target.get(r) == s else 0
    return table


def _g_table(binfo: BagInfo, cinfo: BagInfo, fc: Table) -> Tuple[Table, int]:
    """g(r, s, b, c) for r ⊆ s ⊆ b ∩ c, keyed by b-local masks.

    Returns the table and the b-local mask of b ∩ c.
    """
    to_c: Dict[int, int] = {}
    inter_b = 0
    for f, i in binfo.index.items():
        j = cinfo.index.get(f)
        if j is not None:
            inter_b |= 1 << i
            to_c[1 << i] = 1 << j
    c_only = cinfo.full & ~cinfo.mask(f for f in cinfo.facts if f in binfo.index)
    tr = {0: 0}
    for sub in sorted(_submasks(inter_b)):
        if sub:
            low = sub & -sub
            tr[sub] = tr[sub ^ low] | to_c[low]
    g: Table = {}
    for s in _submasks(inter_b):
        s_c = tr[s] | c_only
        for r in _submasks(s):
            r_c = tr[r]
            total = 0
            for extra in _submasks(c_only):
                total += fc.get((r_c | extra, s_c), 0)
            g[(r, s)] = total
    return g, inter_b


def _fold(fprev: Table, g: Table, inter: int, full: int) -> Table:
    """Combine the table for children so far with one more child's g-table."""
    out: Table = {}
    for s in range(full + 1):
        s_out = s & ~inter
        s_in = s & inter
        for r in _submasks(s):
            r_in = r & inter
            free = s_in & ~r_in
            total = 0
            # s' = r_in | a, s'' = r_in | (free - a) | x with x ⊆ a
            for a in _submasks(free):
                fp = fprev.get((r, s_out | r_in | a), 0)
                if not fp:
                    continue
                rest = r_in | (free & ~a)
                for x in _submasks(a):
                    total += fp * g.get((r_in, rest | x), 0)
            out[(r, s)] = total
    return out


@dataclass
class DPRun:
    """Outcome of one pass of the counting program."""

    count: int
    T: RootedDecomposition
    infos: List[BagInfo]
    f_tables: Dict[Tuple[int, int], Table] = field(default_factory=dict)
    g_tables: Dict[Tuple[int, int], Table] = field(default_factory=dict)
    sizes: Dict[Tuple[str, int, int], int] = field(default_factory=dict)

    def f(self, r, s, b: int, prefix: Optional[int] = None) -> int:
        """Stored f(r, s, b, first ``prefix`` children); needs keep_tables."""
        if prefix is None:
            prefix = len(self.T.children[b])
        info = self.infos[b]
        return self.f_tables[(b, prefix)][(info.mask(r), info.mask(s))]

    def g(self, r, s, b: int, c: int) -> int:
        info = self.infos[b]
        return self.g_tables[(b, c)][(info.mask(r), info.mask(s))]

    def trace_lines(self) -> List[str]:
        """Every stored entry, e.g. ``f({R(a,b)}, {R(a,b),R(c,b)}, b0, (b1)) = 1``."""

        def fs(info, m):
            return "{" + ",".join(str(x) for x in sorted(info.facts_of(m))) + "}"

        lines = []
        for (b, j), table in sorted(self.f_tables.items()):
            info = self.infos[b]
            kids = "(" + ",".join(f"b{c}" for c in self.T.children[b][:j]) + ")"
            for (r, s), v in sorted(table.items(), key=lambda kv: (kv[0][1], kv[0][0])):
                lines.append(f"f({fs(info, r)}, {fs(info, s)}, b{b}, {kids}) = {v}")
        for (b, c), table in sorted(self.g_tables.items()):
            info = self.infos[b]
            for (r, s), v in sorted(table.items(), key=lambda kv: (kv[0][1], kv[0][0])):
                lines.append(f"g({fs(info, r)}, {fs(info, s)}, b{b}, b{c}) = {v}")
        return lines


def run_dp(
    H: LabeledHypergraph,
    T: RootedDecomposition,
    keep_tables: bool = False,
    force: bool = False,
    max_bag: int = MAX_BAG,
) -> DPRun:
    """Run the counting program on the solution-conflict hypergraph H."""
    check(T, H)
    if T.max_bag_size > max_bag and not force:
        raise SizeGuardError(
            f"largest bag has {T.max_bag_size} facts (limit {max_bag}); pass force=True to run anyway")
    infos = _bag_infos(H, T)
    run = DPRun(0, T, infos)
    final: Dict[int, Table] = {}
    for b in T.postorder():
        info = infos[b]
        table = _base_table(info)
        run.sizes[("f", b, 0)] = len(table)
        if keep_tables:
            run.f_tables[(b, 0)] = table
        for j, c in enumerate(T.children[b], 1):
            g, inter = _g_table(info, infos[c], final.pop(c))
            run.sizes[("g", b, c)] = len(g)
            table = _fold(table, g, inter, info.full)
            run.sizes[("f", b, j)] = len(table)
            if keep_tables:
                run.g_tables[(b, c)] = g
                run.f_tables[(b, j)] = table
        final[b] = table
    root = infos[T.root]
    top = final[T.root]
    run.count = sum(top.get((r, root.full), 0) for r in _submasks(root.full))
    return run


# --- public counting API ---------------------------------------------------

def number_falsify(
    db,
    constraints: Iterable[Constraint],
    q: Query,
    T: Optional[RootedDecomposition] = None,
    *,
    heuristic: str = "min-fill",
    force: bool = False,
    H: Optional[LabeledHypergraph] = None,
) -> int:
    """Number of repairs of ``db`` that falsify ``q``."""
    if H is None:
        H = build_solution_conflict(db, list(constraints), q)
    if T is None:
        T = decompose(H, heuristic)
    return run_dp(H, T, force=force).count


def count_satisfying(db, constraints, q: Query, *, heuristic: str = "min-fill", force: bool = False) -> int:
    constraints = list(constraints)
    total = number_falsify(db, constraints, FALSE, H=build_conflict(db, constraints),
                           heuristic=heuristic, force=force)
    return total - number_falsify(db, constraints, q, heuristic=heuristic, force=force)


def cqa_decide(db, constraints, q: Query, *, heuristic: str = "min-fill", force: bool = False) -> bool:
    """Whether ``q`` holds in every repair of ``db``."""
    return number_falsify(db, list(constraints), q, heuristic=heuristic, force=force) == 0


@dataclass
class CountResult:
    total: int
    falsifying: int
    H: LabeledHypergraph
    T: RootedDecomposition
    width: int
    timings_ms: Dict[str, float]
    runs: Tuple[DPRun, DPRun]

    @property
    def satisfying(self) -> int:
        return self.total - self.falsifying

    @property
    def cqa(self) -> bool:
        return self.falsifying == 0


def count_all(
    db,
    constraints,
    q: Query,
    *,
    heuristic: str = "min-fill",
    force: bool = False,
    keep_tables: bool = False,
    threads: int = 1,
) -> CountResult:
    """Total, falsifying and satisfying repair counts with per-phase timings.

    With ``threads`` other than 1 the two passes run on a thread pool
    (0 means one worker per pass).
    """
    constraints = list(constraints)
    timings: Dict[str, float] = {}
    t0 = time.perf_counter()
    H = build_solution_conflict(db, constraints, q)
    Hc = LabeledHypergraph(H.nodes, H.conflicts)
    t1 = time.perf_counter()
    T = decompose(H, heuristic)
    Tc = decompose(Hc, heuristic)
    t2 = time.perf_counter()
    if threads == 1:
        all_run = run_dp(Hc, Tc, keep_tables=keep_tables, force=force)
        false_run = run_dp(H, T, keep_tables=keep_tables, force=force)
    else:
        with ThreadPoolExecutor(max_workers=threads or 2) as pool:
            fa = pool.submit(run_dp, Hc, Tc, keep_tables, force)
            ff = pool.submit(run_dp, H, T, keep_tables, force)
            all_run, false_run = fa.result(), ff.result()
    t3 = time.perf_counter()
    timings["hypergraph"] = (t1 - t0) * 1000
    timings["decompose"] = (t2 - t1) * 1000
    timings["dp"] = (t3 - t2) * 1000
    return CountResult(
        total=all_run.count,
        falsifying=false_run.count,
        H=H,
        T=T,
        width=max(T.width, Tc.width),
        timings_ms=timings,
        runs=(all_run, false_run),
    )
