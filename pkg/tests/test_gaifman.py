from __future__ import annotations

import itertools

import pytest
from hypothesis import given, strategies as st

from repairkit.gaifman import (
    build_structure,
    depfails_arity,
    emit_mso,
    gaifman_graph,
    mso_for,
    q_consistent,
    q_linked,
    tw_measures,
)
from repairkit.generators import CONSTRAINT_KINDS, GenSpec, gen_bipartite, gen_chain, gen_random
from repairkit.relational import DC, Atom, Var, fact, key
from repairkit.textio import parse_query

x, y, z = Var("x"), Var("y"), Var("z")


def _brute_consistent(fi, fj, d, i, j):
    """Try every assignment of the two atoms' variables over the facts' constants."""
    ai, aj = d.atoms[i], d.atoms[j]
    vs = sorted(ai.variables() | aj.variables())
    consts = sorted(set(fi.values) | set(fj.values))
    for vals in itertools.product(consts, repeat=len(vs)):
        h = dict(zip(vs, vals))
        img = lambda a: tuple(h[t] if isinstance(t, Var) else t for t in a.terms)
        if ai.relation != fi.relation or aj.relation != fj.relation:
            return False
        if img(ai) != fi.values or img(aj) != fj.values:
            continue
        if all(c.holds(h) for c in d.inequalities if c.variables() <= set(vs)):
            return True
    return False


def test_q_linked():
    d = parse_query("R(?x,?y), S(?y,?z), T(?w), ?w != ?x").disjuncts[0]
    L = q_linked(d)
    assert (0, 1) in L and (1, 0) in L and (0, 0) in L
    assert (0, 2) in L  # bridged by the inequality
    assert (1, 2) not in L


facts_r = st.tuples(st.sampled_from("ab"), st.sampled_from("ab")).map(lambda t: fact("R", *t))
facts_s = st.tuples(st.sampled_from("ab"), st.sampled_from("ab")).map(lambda t: fact("S", *t))
queries = st.sampled_from([
    "R(?x,?y), S(?y,?z)",
    "R(?x,?y), S(?y,?x), ?x != ?y",
    "R(?x,a), S(?x,?y), ?y != a",
    "R(?x,?y), S(?z,?w), ?x != ?z",
])


@given(queries, facts_r, facts_s)
def test_q_consistent_matches_brute_force(qtext, fi, fj):
    d = parse_query(qtext).disjuncts[0]
    if (0, 1) not in q_linked(d):
        assert not q_consistent(fi, fj, d, 0, 1)
        return
    assert q_consistent(fi, fj, d, 0, 1) == _brute_consistent(fi, fj, d, 0, 1)
    assert q_consistent(fi, fj, d, 0, 1) == q_consistent(fj, fi, d, 1, 0)


def test_depfails_arity():
    assert depfails_arity([key("R", 1)]) == ("fd", 2)
    assert depfails_arity([]) == ("fd", 2)
    dc3 = DC((Atom("R", (x, y)), Atom("R", (y, z)), Atom("R", (z, x))))
    assert depfails_arity([key("R", 1), dc3]) == ("dc", 3)


@given(st.sampled_from(CONSTRAINT_KINDS), st.integers(0, 100_000))
def test_structure_relations_are_symmetric(kind, seed):
    db, cs, q = gen_random(GenSpec(n=8, constraint_kind=kind, seed=seed))
    S = build_structure(db, cs, q)
    for t in S.depfails:
        assert len(t) == S.arity
    for (l, i, j), pairs in S.linked.items():
        assert {(g, f) for f, g in pairs} == S.linked[(l, j, i)]
    g = gaifman_graph(S)
    assert set(g.nodes) == set(db)


def test_mso_text_shape():
    q = parse_query("R(?x,?y), S(?y,?z)\nT(a)")
    txt = emit_mso("fd", q)
    assert txt.startswith(";; depfails/2\n")
    assert "(define Phi " in txt and "phi-qsat-2" in txt
    assert "linked_1_1_2" in txt and "linked_2_1_1" in txt
    assert txt.count("(") == txt.count(")")
    dc = emit_mso("dc", q, 3)
    assert "(define Psi " in dc and "(depfails x1 x2 x3)" in dc
    assert emit_mso("fd", parse_query("false")).rstrip().endswith("(or))))")
    with pytest.raises(ValueError):
        emit_mso("other", q)


@pytest.mark.parametrize("n", [2, 3])
def test_family_treewidths(n):
    m = tw_measures(*gen_bipartite(n))
    assert (m.tw_h_exact, m.tw_g_exact) == (n, 0)
    m = tw_measures(*gen_chain(n))
    assert m.tw_h_exact <= 1 and m.tw_g_exact == n


def test_mso_independent_of_database():
    q = parse_query("R(?x,?y)")
    cs = [key("R", 1)]
    assert mso_for(cs, q) == emit_mso("fd", q)
