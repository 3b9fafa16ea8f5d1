"""Tree decompositions: elimination heuristics, validation, rooting, exact treewidth."""

from __future__ import annotations

import heapq
from collections import defaultdict, deque
from dataclasses import dataclass, replace
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Set, Tuple

import networkx as nx

from .errors import InvalidDecompositionError, SizeGuardError

HEURISTICS = ("min-fill", "min-degree")


def _bag_key(bag) -> tuple:
    return (len(bag), tuple(sorted(bag)))


@dataclass(frozen=True)
class RootedDecomposition:
    bags: Tuple[frozenset, ...]
    edges: Tuple[Tuple[int, int], ...]
    root: int
    children: Tuple[Tuple[int, ...], ...]
    parent: Tuple[Optional[int], ...]

    @property
    def width(self) -> int:
        return self.max_bag_size - 1

    @property
    def max_bag_size(self) -> int:
        return max(len(b) for b in self.bags)

    def __len__(self) -> int:
        return len(self.bags)

    def postorder(self) -> List[int]:
        """Bag indices, every child before its parent."""
        out: List[int] = []
        stack = [(self.root, False)]
        while stack:
            b, expanded = stack.pop()
            if expanded:
                out.append(b)
                continue
            stack.append((b, True))
            for c in reversed(self.children[b]):
                stack.append((c, False))
        return out

    def with_child_order(self, children: Sequence[Sequence[int]]) -> "RootedDecomposition":
        new = tuple(tuple(c) for c in children)
        for b, (old, cur) in enumerate(zip(self.children, new)):
            if sorted(old) != sorted(cur):
                raise InvalidDecompositionError(f"bag {b}: children {cur} are not a permutation of {old}")
        return replace(self, children=new)

    def reversed_children(self) -> "RootedDecomposition":
        return self.with_child_order([tuple(reversed(c)) for c in self.children])

    def to_text(self) -> str:
        """One bag per line, then ``edge i j`` lines (0-based bag indices)."""
        lines = [f"root {self.root}"]
        for i, b in enumerate(self.bags):
            lines.append(f"bag {i}: " + " ".join(str(v) for v in sorted(b)))
        for a, b in self.edges:
            lines.append(f"edge {a} {b}")
        return "\n".join(lines) + "\n"


def root_and_order(bags: Sequence[Iterable], edges: Iterable[Tuple[int, int]], root: int = 0) -> RootedDecomposition:
    """Root the bag tree at ``root``; children follow canonical bag order."""
    bags = tuple(frozenset(b) for b in bags)
    edges = tuple(sorted(tuple(sorted(e)) for e in edges))
    if not 0 <= root < len(bags):
        raise InvalidDecompositionError(f"root {root} is not a bag index")
    adj: Dict[int, List[int]] = defaultdict(list)
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    parent: List[Optional[int]] = [None] * len(bags)
    children: List[Tuple[int, ...]] = [()] * len(bags)
    seen = {root}
    queue = deque([root])
    while queue:
        b = queue.popleft()
        kids = [c for c in adj[b] if c not in seen]
        kids.sort(key=lambda c: (_bag_key(bags[c]), c))
        for c in kids:
            seen.add(c)
            parent[c] = b
            queue.append(c)
        children[b] = tuple(kids)
    if len(seen) != len(bags) or len(edges) != len(bags) - 1:
        raise InvalidDecompositionError("bag edges do not form a tree")
    return RootedDecomposition(bags, edges, root, tuple(children), tuple(parent))


def reroot(T: RootedDecomposition, root: int) -> RootedDecomposition:
    return root_and_order(T.bags, T.edges, root)


def _hyper(H) -> Tuple[List[Hashable], List[frozenset]]:
    if isinstance(H, nx.Graph):
        return list(H.nodes), [frozenset(e) for e in H.edges]
    return list(H.nodes), [frozenset(e) for e in H.hyperedges()]


def _adjacency(H) -> Dict[Hashable, Set[Hashable]]:
    nodes, edges = _hyper(H)
    adj: Dict[Hashable, Set[Hashable]] = {v: set() for v in nodes}
    for e in edges:
        for u in e:
            adj[u].update(w for w in e if w != u)
    return adj


def _fill(adj, v) -> int:
    ns = list(adj[v])
    missing = 0
    for i, a in enumerate(ns):
        na = adj[a]
        for b in ns[i + 1:]:
            if b not in na:
                missing += 1
    return missing


def elimination_order(adj: Dict[Hashable, Set[Hashable]], heuristic: str = "min-fill"):
    """Greedy elimination; returns [(vertex, neighbours at elimination)].

    Ties break by canonical vertex order.
    """
    if heuristic not in HEURISTICS:
        raise ValueError(f"unknown heuristic {heuristic!r}; choose from {HEURISTICS}")
    adj = {v: set(ns) for v, ns in adj.items()}
    verts = sorted(adj)
    rank = {v: i for i, v in enumerate(verts)}
    score = (lambda v: len(adj[v])) if heuristic == "min-degree" else (lambda v: _fill(adj, v))
    heap = [(score(v), rank[v]) for v in verts]
    heapq.heapify(heap)
    out = []
    while heap:
        s, r = heapq.heappop(heap)
        v = verts[r]
        if v not in adj:
            continue
        cur = score(v)
        if cur != s:
            heapq.heappush(heap, (cur, r))
            continue
        nb = adj.pop(v)
        out.append((v, frozenset(nb)))
        for a in nb:
            adj[a].discard(v)
        nbl = list(nb)
        for i, a in enumerate(nbl):
            for b in nbl[i + 1:]:
                adj[a].add(b)
                adj[b].add(a)
        touched = set(nb)
        if heuristic == "min-fill":
            for a in nb:
                touched |= adj[a]
        for w in touched:
            heapq.heappush(heap, (score(w), rank[w]))
    return out


def _contract(bags: Dict[int, frozenset], adj: Dict[int, Set[int]]) -> None:
    """Merge every bag into a neighbour that contains it (in place)."""
    work = deque(sorted(bags))
    while work:
        a = work.popleft()
        if a not in bags:
            continue
        for b in sorted(adj[a]):
            if bags[a] <= bags[b]:
                for x in adj[a]:
                    if x != b:
                        adj[x].discard(a)
                        adj[x].add(b)
                        adj[b].add(x)
                        work.append(x)
                adj[b].discard(a)
                del adj[a]
                del bags[a]
                work.append(b)
                break


def decompose(H, heuristic: str = "min-fill") -> RootedDecomposition:
    """Tree decomposition of H (hypergraph or nx.Graph) rooted at bag 0.

    Nodes in no edge get singleton bags hanging off the root.
    """
    adj = _adjacency(H)
    isolated = sorted(v for v, ns in adj.items() if not ns)
    connected = {v: ns for v, ns in adj.items() if ns}
    order = elimination_order(connected, heuristic)
    pos = {v: i for i, (v, _) in enumerate(order)}
    bags: Dict[int, frozenset] = {}
    tree: Dict[int, Set[int]] = defaultdict(set)
    roots = []
    for i, (v, nb) in enumerate(order):
        bags[i] = nb | {v}
        tree[i]
        if nb:
            p = min(pos[u] for u in nb)
            tree[i].add(p)
            tree[p].add(i)
        else:
            roots.append(i)
    for r in roots[1:]:
        tree[r].add(roots[0])
        tree[roots[0]].add(r)
    _contract(bags, tree)
    ids = sorted(bags)
    renum = {old: new for new, old in enumerate(ids)}
    out_bags = [bags[i] for i in ids]
    out_edges = {tuple(sorted((renum[a], renum[b]))) for a in ids for b in tree[a]}
    for v in isolated:
        out_bags.append(frozenset([v]))
        if len(out_bags) > 1:
            out_edges.add((0, len(out_bags) - 1))
    if not out_bags:
        out_bags.append(frozenset())
    return root_and_order(out_bags, out_edges, 0)


def check(T: RootedDecomposition, H) -> None:
    """Raise InvalidDecompositionError naming the first violated condition."""
    nodes, edges = _hyper(H)
    n = len(T.bags)
    if len(T.edges) != n - 1:
        raise InvalidDecompositionError("bag graph is not a tree (edge count)")
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(T.edges)
    if not nx.is_tree(g):
        raise InvalidDecompositionError("bag graph is not a tree")
    covered = set().union(*T.bags)
    if covered != set(nodes):
        extra = covered - set(nodes)
        raise InvalidDecompositionError(
            f"bags mention unknown node {sorted(extra)[0]}" if extra
            else f"node {sorted(set(nodes) - covered)[0]} is in no bag")
    where: Dict[Hashable, List[int]] = defaultdict(list)
    for i, b in enumerate(T.bags):
        for v in b:
            where[v].append(i)
    for e in edges:
        v = next(iter(e))
        if not any(e <= T.bags[i] for i in where[v]):
            raise InvalidDecompositionError(f"hyperedge {sorted(e)} is in no bag")
    shared: Dict[Hashable, int] = defaultdict(int)
    for a, b in T.edges:
        for v in T.bags[a] & T.bags[b]:
            shared[v] += 1
    for v, bs in where.items():
        if shared[v] != len(bs) - 1:
            raise InvalidDecompositionError(f"bags containing {v} are not connected")
    if T.parent[T.root] is not None:
        raise InvalidDecompositionError("root has a parent")
    for b in range(n):
        nbrs = set(g[b]) - ({T.parent[b]} if T.parent[b] is not None else set())
        if set(T.children[b]) != nbrs or len(T.children[b]) != len(nbrs):
            raise InvalidDecompositionError(f"children of bag {b} disagree with the tree")
        for c in T.children[b]:
            if T.parent[c] != b:
                raise InvalidDecompositionError(f"bag {c} has the wrong parent")


def validate(T: RootedDecomposition, H) -> bool:
    try:
        check(T, H)
    except InvalidDecompositionError:
        return False
    return True


# --- exact treewidth -------------------------------------------------------

def _component_tw(nbmask: List[int]) -> int:
    n = len(nbmask)
    full = (1 << n) - 1
    tw = [0] * (1 << n)
    tw[0] = -1
    for S in range(1, full + 1):
        best = n
        rest_bits = S
        while rest_bits:
            low = rest_bits & -rest_bits
            rest_bits ^= low
            v = low.bit_length() - 1
            rest = S ^ low
            if tw[rest] >= best:
                continue
            # vertices outside rest+v reachable from v through rest
            seen = low
            stack = [v]
            q = 0
            while stack:
                u = stack.pop()
                new = nbmask[u] & ~seen
                seen |= new
                while new:
                    w = new & -new
                    new ^= w
                    if w & rest:
                        stack.append(w.bit_length() - 1)
                    else:
                        q |= w
            val = max(tw[rest], bin(q).count("1"))
            if val < best:
                best = val
        tw[S] = best
    return tw[full]


def exact_treewidth(G: nx.Graph, limit: int = 12) -> int:
    """Exact treewidth by subset dynamic programming, per connected component.

    The size guard applies to the largest component; the empty graph has
    treewidth -1.
    """
    if G.number_of_nodes() == 0:
        return -1
    best = 0
    for comp in nx.connected_components(G):
        if len(comp) == 1:
            continue
        if len(comp) > limit:
            raise SizeGuardError(f"component with {len(comp)} vertices exceeds exact-treewidth limit {limit}")
        vs = sorted(comp, key=repr)
        idx = {v: i for i, v in enumerate(vs)}
        nbmask = [0] * len(vs)
        for u, w in G.subgraph(comp).edges:
            if u != w:
                nbmask[idx[u]] |= 1 << idx[w]
                nbmask[idx[w]] |= 1 << idx[u]
        best = max(best, _component_tw(nbmask))
    return best
