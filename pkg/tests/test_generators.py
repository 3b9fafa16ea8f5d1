from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from repairkit.generators import CONSTRAINT_KINDS, GenSpec, gen_bipartite, gen_chain, gen_path, gen_random, generate
from repairkit.relational import Key, check_constraint_schema, check_query_schema, fact, key_blocks


def test_bipartite():
    db, cs, q = gen_bipartite(3)
    assert len(db) == 6 and cs == [] and q.atom_count() == 2


def test_chain():
    db, cs, q = gen_chain(2)
    assert fact("R", "1", "*") in db and fact("T", "neg2") in db and len(db) == 6


def test_path_matches_named_example():
    db, cs = gen_path(5, "abcdef")
    assert [str(f) for f in sorted(db)] == ["R(a,b)", "R(c,b)", "R(c,d)", "R(e,d)", "R(e,f)"]
    assert cs == [Key("R", frozenset({1})), Key("R", frozenset({2}))]


@given(st.sampled_from(CONSTRAINT_KINDS), st.integers(0, 100_000), st.integers(1, 12))
def test_random_is_seeded_and_well_formed(kind, seed, n):
    spec = GenSpec(n=n, constraint_kind=kind, seed=seed)
    a, b = gen_random(spec), gen_random(spec)
    assert a == b
    db, cs, q = a
    assert len(db) <= n
    arities = {"R": 2, "S": 2, "T": 1}
    check_constraint_schema(cs, arities)
    check_query_schema(q, arities)
    assert q.max_disjunct_atoms() <= spec.max_atoms
    if kind == "pk":
        key_blocks(db, cs)


def test_genspec_validation():
    with pytest.raises(ValueError):
        GenSpec(family="nope")
    with pytest.raises(ValueError):
        GenSpec(constraint_kind="nope")
    with pytest.raises(ValueError):
        GenSpec(n=0)


def test_generate_dispatch():
    db, cs, q = generate(GenSpec(family="path", n=4))
    assert len(db) == 4 and len(q.disjuncts) == 1
    assert generate(GenSpec(family="bipartite", n=2))[0] == gen_bipartite(2)[0]
