"""Readers and writers for .facts, .cst and .q files and the JSON report.

Line-oriented formats, ``#`` starts a comment::

    # facts
    R(a,b)
    # constraints
    key R : 1
    fd R : 1 -> 2
    dc : R(?x,?y), R(?x,?z), ?y != ?z
    # query: one disjunct per line, or the single word ``false``
    R(?x,?y), S(?y,?z), ?x != c

Tokens starting with ``?`` are variables, every other bare token is a
constant.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple, Union

from .errors import ParseError, SchemaError
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

log = logging.getLogger("repairkit")

_STOP = set(" \t\r\n(),:#=!?")


class _Lexer:
    """Tokenizer for one line; tokens are (kind, text, column)."""

    def __init__(self, text: str, file: str, line: int):
        self.file = file
        self.line = line
        self.toks: List[Tuple[str, str, int]] = []
        self.pos = 0
        i, n = 0, len(text)
        while i < n:
            ch = text[i]
            if ch in " \t\r":
                i += 1
            elif ch == "#":
                break
            elif text.startswith("->", i):
                self.toks.append(("->", "->", i + 1))
                i += 2
            elif text.startswith("!=", i):
                self.toks.append(("!=", "!=", i + 1))
                i += 2
            elif ch in "(),:=":
                self.toks.append((ch, ch, i + 1))
                i += 1
            elif ch == "?":
                j = self._word_end(text, i + 1)
                if j == i + 1:
                    raise self.error(i + 1, "empty variable name after '?'")
                self.toks.append(("var", text[i + 1:j], i + 1))
                i = j
            elif ch == "!":
                raise self.error(i + 1, "expected '!='")
            else:
                j = self._word_end(text, i)
                self.toks.append(("word", text[i:j], i + 1))
                i = j
        self.end_col = len(text.rstrip()) + 1

    @staticmethod
    def _word_end(text: str, i: int) -> int:
        while i < len(text) and text[i] not in _STOP and not text.startswith("->", i):
            i += 1
        return i

    def error(self, col: int, msg: str) -> ParseError:
        return ParseError(self.file, self.line, col, msg)

    def peek(self) -> Optional[Tuple[str, str, int]]:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def col(self) -> int:
        t = self.peek()
        return t[2] if t else self.end_col

    def next(self, kind: Optional[str] = None, what: str = "") -> Tuple[str, str, int]:
        t = self.peek()
        if t is None or (kind is not None and t[0] != kind):
            found = f"'{t[1]}'" if t else "end of line"
            raise self.error(self.col(), f"expected {what or kind}, found {found}")
        self.pos += 1
        return t

    def accept(self, kind: str) -> bool:
        t = self.peek()
        if t is not None and t[0] == kind:
            self.pos += 1
            return True
        return False

    def done(self) -> bool:
        return self.pos >= len(self.toks)

    def expect_end(self):
        if not self.done():
            raise self.error(self.col(), f"unexpected '{self.peek()[1]}'")

    def term(self):
        kind, text, _ = self.next(what="a term")
        if kind == "var":
            return Var(text)
        if kind == "word":
            return text
        raise self.error(self.toks[self.pos - 1][2], f"expected a term, found '{text}'")

    def atom(self) -> Atom:
        _, rel, _ = self.next("word", "a relation name")
        self.next("(", "'('")
        terms = [self.term()]
        while self.accept(","):
            terms.append(self.term())
        self.next(")", "')' or ','")
        return Atom(rel, tuple(terms))

    def item(self, allow_eq: bool) -> Union[Atom, Comparison]:
        """A relational atom or a comparison ``t != u`` / ``t = u``."""
        if (len(self.toks) > self.pos + 1 and self.toks[self.pos][0] == "word"
                and self.toks[self.pos + 1][0] == "("):
            return self.atom()
        col = self.col()
        left = self.term()
        if self.accept("!="):
            return Comparison(left, self.term(), True)
        if allow_eq and self.accept("="):
            return Comparison(left, self.term(), False)
        raise self.error(self.col() if not self.done() else col, "expected an atom or a comparison")

    def items(self, allow_eq: bool) -> List[Union[Atom, Comparison]]:
        out = [self.item(allow_eq)]
        while self.accept(","):
            out.append(self.item(allow_eq))
        self.expect_end()
        return out


def _lines(text: str):
    for n, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0]
        if body.strip():
            yield n, raw


def parse_database(text: str, file: str = "<facts>") -> Database:
    facts: Dict[Fact, int] = {}
    arities: Dict[str, Tuple[int, int]] = {}
    for n, raw in _lines(text):
        lx = _Lexer(raw, file, n)
        col = lx.col()
        a = lx.atom()
        lx.expect_end()
        for i, t in enumerate(a.terms):
            if isinstance(t, Var):
                raise lx.error(col, f"variable ?{t.name} in a fact")
        f = Fact(a.relation, tuple(a.terms))
        seen = arities.setdefault(f.relation, (f.arity, n))
        if seen[0] != f.arity:
            raise lx.error(col, f"{f.relation} has arity {seen[0]} (line {seen[1]}), found {f.arity}")
        if f in facts:
            log.warning("%s:%d: duplicate fact %s (first on line %d)", file, n, f, facts[f])
            continue
        facts[f] = n
    return Database(facts)


def _positions(lx: _Lexer, stop: Optional[str]) -> frozenset:
    out = []
    while not lx.done() and lx.peek()[0] != stop:
        kind, text, col = lx.next("word", "a position")
        if not text.isdigit() or int(text) < 1:
            raise lx.error(col, f"position must be a positive integer, found '{text}'")
        out.append(int(text))
        lx.accept(",")
    return frozenset(out)


def parse_constraints(text: str, file: str = "<constraints>") -> List[Constraint]:
    """Parse a constraint file; repeated declarations collapse with a warning.

    Positions are checked against arities only once a database is known
    (see :func:`repairkit.relational.check_constraint_schema`).
    """
    out: List[Constraint] = []
    seen = set()
    for n, raw in _lines(text):
        lx = _Lexer(raw, file, n)
        kind, word, col = lx.next("word", "'key', 'fd' or 'dc'")
        if word == "key":
            _, rel, _ = lx.next("word", "a relation name")
            lx.next(":", "':'")
            c = Key(rel, _positions(lx, None), line=n)
        elif word == "fd":
            _, rel, _ = lx.next("word", "a relation name")
            lx.next(":", "':'")
            lhs = _positions(lx, "->")
            lx.next("->", "'->'")
            c = FD(rel, lhs, _positions(lx, None), line=n)
        elif word == "dc":
            lx.next(":", "':'")
            body_col = lx.col()
            body = lx.items(allow_eq=True)
            try:
                c = DC(tuple(body), line=n)
            except SchemaError as e:
                raise lx.error(body_col, e.message) from None
        else:
            raise lx.error(col, f"unknown constraint kind '{word}'")
        lx.expect_end()
        if c in seen:
            log.warning("%s:%d: duplicate constraint '%s'", file, n, c)
            continue
        seen.add(c)
        out.append(c)
    return out


def parse_query(text: str, file: str = "<query>") -> Query:
    disjuncts: List[Disjunct] = []
    saw_false = None
    for n, raw in _lines(text):
        lx = _Lexer(raw, file, n)
        if len(lx.toks) == 1 and lx.toks[0][:2] == ("word", "false"):
            saw_false = (n, lx.toks[0][2])
            continue
        col = lx.col()
        items = lx.items(allow_eq=False)
        atoms = tuple(i for i in items if isinstance(i, Atom))
        neqs = tuple(i for i in items if isinstance(i, Comparison))
        try:
            disjuncts.append(Disjunct(atoms, neqs, line=n))
        except SchemaError as e:
            raise lx.error(col, e.message) from None
    if saw_false is not None:
        if disjuncts:
            raise ParseError(file, saw_false[0], saw_false[1], "'false' must be the only disjunct")
        return Query.false()
    if not disjuncts:
        raise ParseError(file, 1, 1, "empty query (write 'false' for the false query)")
    return Query(tuple(disjuncts))


def serialize_database(db) -> str:
    return "".join(f"{f}\n" for f in sorted(db))


def serialize_constraints(constraints) -> str:
    return "".join(f"{c}\n" for c in constraints)


def serialize_query(q: Query) -> str:
    if q.is_false:
        return "false\n"
    return "".join(f"{d}\n" for d in q.disjuncts)


# --- report ----------------------------------------------------------------

@dataclass
class RunReport:
    repairs_total: int
    repairs_falsifying: int
    repairs_satisfying: int
    cqa: bool
    width_used: int
    bags: int
    nodes: int
    conflict_edges: int
    solution_edges: int
    timings_ms: Dict[str, float] = field(default_factory=dict)


def emit_report(results: Union[RunReport, Mapping], timings: bool = True) -> str:
    """Serialize a run report as JSON; counts become decimal strings."""
    r = asdict(results) if isinstance(results, RunReport) else dict(results)
    out = {
        "repairs_total": str(r["repairs_total"]),
        "repairs_falsifying": str(r["repairs_falsifying"]),
        "repairs_satisfying": str(r["repairs_satisfying"]),
        "cqa": bool(r["cqa"]),
        "width_used": r["width_used"],
        "bags": r["bags"],
        "graph": {
            "nodes": r["nodes"],
            "conflict_edges": r["conflict_edges"],
            "solution_edges": r["solution_edges"],
        },
    }
    if timings:
        out["timings_ms"] = {k: round(v, 3) for k, v in r.get("timings_ms", {}).items()}
    return json.dumps(out, indent=2)
