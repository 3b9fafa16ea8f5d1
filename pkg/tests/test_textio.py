from __future__ import annotations

import json
import logging

import pytest
from hypothesis import given, strategies as st

from repairkit.errors import ParseError
from repairkit.generators import CONSTRAINT_KINDS, GenSpec, gen_random
from repairkit.relational import DC, FD, Key, fact
from repairkit.textio import (
    RunReport,
    emit_report,
    parse_constraints,
    parse_database,
    parse_query,
    serialize_constraints,
    serialize_database,
    serialize_query,
)


def test_facts_with_comments_and_blank_lines():
    db = parse_database("# header\nR(a,b)  # trailing\n\nS(c)\n")
    assert set(db) == {fact("R", "a", "b"), fact("S", "c")}


def test_arity_mismatch_reports_position():
    with pytest.raises(ParseError) as ei:
        parse_database("R(a,b)\n  R(a)\n", "x.facts")
    e = ei.value
    assert (e.file, e.line, e.column) == ("x.facts", 2, 3)
    assert str(e).startswith("x.facts:2:3:")


def test_variable_in_fact_rejected():
    with pytest.raises(ParseError):
        parse_database("R(?x)\n")


def test_duplicate_fact_warns(caplog):
    with caplog.at_level(logging.WARNING, logger="repairkit"):
        db = parse_database("R(a)\nR(a)\n", "d.facts")
    assert len(db) == 1
    assert "duplicate fact" in caplog.text and "d.facts:2" in caplog.text


def test_constraint_forms():
    cs = parse_constraints(
        "key R : 1\nfd S : 1,2 -> 3\nfd T : -> 1\ndc : R(?x,?y), R(?x,?z), ?y != ?z\n")
    assert cs[0] == Key("R", frozenset({1}))
    assert cs[1] == FD("S", frozenset({1, 2}), frozenset({3}))
    assert cs[2] == FD("T", frozenset(), frozenset({1}))
    assert isinstance(cs[3], DC) and len(cs[3].atoms) == 2 and len(cs[3].comparisons) == 1


def test_duplicate_constraint_collapses(caplog):
    with caplog.at_level(logging.WARNING, logger="repairkit"):
        cs = parse_constraints("key R : 1\nkey R : 1\n")
    assert len(cs) == 1
    assert "duplicate constraint" in caplog.text


@pytest.mark.parametrize("text,line", [
    ("key R 1\n", 1),
    ("fd R : 1 2\n", 1),
    ("\nfoo R : 1\n", 2),
    ("dc : ?x != ?y\n", 1),
    ("key R : 0\n", 1),
])
def test_constraint_errors_carry_line(text, line):
    with pytest.raises(ParseError) as ei:
        parse_constraints(text, "c.cst")
    assert ei.value.line == line


def test_query_forms():
    q = parse_query("R(?x,?y), ?x != ?y\nS(a)\n")
    assert len(q.disjuncts) == 2
    assert parse_query("# nothing\nfalse\n").is_false


@pytest.mark.parametrize("text", ["", "false\nR(a)\n", "R(?x), ?y != a\n", "R(?x), ?x = a\n"])
def test_query_errors(text):
    with pytest.raises(ParseError):
        parse_query(text)


@given(st.sampled_from(CONSTRAINT_KINDS), st.integers(0, 10_000), st.integers(1, 12))
def test_round_trip(kind, seed, n):
    db, cs, q = gen_random(GenSpec(n=n, constraint_kind=kind, seed=seed))
    assert parse_database(serialize_database(db)) == db
    assert parse_constraints(serialize_constraints(cs)) == cs
    assert parse_query(serialize_query(q)) == q


def test_false_query_round_trip():
    assert parse_query(serialize_query(parse_query("false"))).is_false


def test_report_schema():
    rep = RunReport(10**30, 1, 10**30 - 1, False, 2, 3, 4, 5, 6, {"dp": 1.23456})
    out = json.loads(emit_report(rep))
    assert out["repairs_total"] == str(10**30)
    assert int(out["repairs_total"]) == int(out["repairs_falsifying"]) + int(out["repairs_satisfying"])
    assert out["graph"] == {"nodes": 4, "conflict_edges": 5, "solution_edges": 6}
    assert out["cqa"] is False
    assert "timings_ms" not in json.loads(emit_report(rep, timings=False))
