from __future__ import annotations

import itertools

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from repairkit.errors import InvalidDecompositionError, SizeGuardError
from repairkit.generators import CONSTRAINT_KINDS, GenSpec, gen_random
from repairkit.hypergraphs import build_solution_conflict
from repairkit.treedec import (
    HEURISTICS,
    check,
    decompose,
    exact_treewidth,
    reroot,
    root_and_order,
    validate,
)


def _perm_treewidth(g: nx.Graph) -> int:
    """Treewidth as the best elimination width over all vertex orders."""
    nodes = list(g.nodes)
    if not nodes:
        return -1
    best = len(nodes) - 1
    for order in itertools.permutations(nodes):
        adj = {v: set(g[v]) for v in nodes}
        w = 0
        for v in order:
            nb = adj.pop(v)
            w = max(w, len(nb))
            for u in nb:
                adj[u] |= nb - {u}
                adj[u].discard(v)
        best = min(best, w)
    return best


def test_known_treewidths():
    assert exact_treewidth(nx.complete_bipartite_graph(3, 3)) == 3
    assert exact_treewidth(nx.complete_graph(5)) == 4
    assert exact_treewidth(nx.cycle_graph(7)) == 2
    assert exact_treewidth(nx.path_graph(6)) == 1
    assert exact_treewidth(nx.empty_graph(4)) == 0
    assert exact_treewidth(nx.petersen_graph()) == 4


def test_exact_guard():
    with pytest.raises(SizeGuardError):
        exact_treewidth(nx.path_graph(13), limit=12)
    # the guard is per component
    g = nx.disjoint_union(nx.path_graph(10), nx.path_graph(10))
    assert exact_treewidth(g, limit=12) == 1


@given(st.integers(2, 7), st.floats(0.1, 0.9), st.integers(0, 1000))
def test_exact_matches_permutation_oracle(n, p, seed):
    g = nx.gnp_random_graph(n, p, seed=seed)
    assert exact_treewidth(g) == _perm_treewidth(g)


@given(st.integers(2, 9), st.floats(0.1, 0.9), st.integers(0, 1000), st.sampled_from(HEURISTICS))
def test_heuristic_is_valid_upper_bound(n, p, seed, h):
    g = nx.gnp_random_graph(n, p, seed=seed)
    T = decompose(g, h)
    assert validate(T, g)
    assert T.width >= exact_treewidth(g)


@given(st.sampled_from(CONSTRAINT_KINDS), st.integers(0, 10_000), st.sampled_from(HEURISTICS))
def test_decompositions_of_instances_validate(kind, seed, h):
    db, cs, q = gen_random(GenSpec(n=10, constraint_kind=kind, seed=seed))
    H = build_solution_conflict(db, cs, q)
    T = decompose(H, h)
    check(T, H)
    for r in range(len(T)):
        T2 = reroot(T, r)
        assert validate(T2, H) and validate(T2.reversed_children(), H)
        assert sorted(T2.postorder()) == list(range(len(T)))
        assert T2.postorder()[-1] == r


def test_empty_graph_single_bag():
    T = decompose(nx.Graph())
    assert T.bags == (frozenset(),) and T.width == -1


def test_isolated_nodes_get_bags():
    g = nx.Graph()
    g.add_nodes_from([1, 2, 3])
    g.add_edge(1, 2)
    T = decompose(g)
    assert validate(T, g) and len(T) == 2


def test_check_rejects_broken_decompositions():
    g = nx.path_graph(3)
    with pytest.raises(InvalidDecompositionError):
        check(root_and_order([{0, 1}, {2}], [(0, 1)]), g)  # edge 1-2 uncovered
    with pytest.raises(InvalidDecompositionError):
        check(root_and_order([{0, 1}, {2}, {1, 2}], [(0, 1), (1, 2)]), g)  # node 1 disconnected
    with pytest.raises(InvalidDecompositionError):
        root_and_order([{0}, {1}], [])
    check(root_and_order([{0, 1}, {1, 2}], [(0, 1)]), g)


def test_text_export():
    T = root_and_order([{0, 1}, {1, 2}], [(0, 1)])
    txt = T.to_text()
    assert txt.count("\n") >= 2
