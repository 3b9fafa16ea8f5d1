"""Command-line front end.

Exit codes: 0 success (``cqa``: the query is certain), 1 ``cqa`` answered
false, 2 parse or schema error, 3 size-guard refusal.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import count as count_mod
from .errors import ParseError, SchemaError, SizeGuardError
from .gaifman import build_structure, depfails_arity, emit_mso, gaifman_graph, tw_measures
from .generators import CONSTRAINT_KINDS, FAMILIES, GenSpec, generate
from .hypergraphs import build_solution_conflict, primal_graph, to_dot
from .oracle import DEFAULT_LIMIT, oracle_counts
from .relational import FALSE, check_constraint_schema, check_query_schema
from .textio import (
    RunReport,
    emit_report,
    parse_constraints,
    parse_database,
    parse_query,
    serialize_constraints,
    serialize_database,
    serialize_query,
)
from .treedec import HEURISTICS, decompose, exact_treewidth

EXIT_OK, EXIT_FALSE, EXIT_INPUT, EXIT_GUARD = 0, 1, 2, 3

log = logging.getLogger("repairkit")


def threads_from_env() -> int:
    """REPAIRKIT_THREADS: 0 (default) means automatic."""
    raw = os.environ.get("REPAIRKIT_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise SystemExit(f"REPAIRKIT_THREADS must be an integer, got {raw!r}")
    if n < 0:
        raise SystemExit("REPAIRKIT_THREADS must be >= 0")
    return n


@dataclass
class Inputs:
    db: object
    constraints: list
    q: object
    parse_ms: float


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"{path}: {e.strerror}") from None


def load(args, need_query: bool) -> Inputs:
    t0 = time.perf_counter()
    db = parse_database(_read(args.db), args.db)
    constraints = parse_constraints(_read(args.constraints), args.constraints) if args.constraints else []
    if getattr(args, "query", None):
        q = parse_query(_read(args.query), args.query)
    elif need_query:
        raise InputError("--query is required")
    else:
        q = FALSE
    try:
        check_constraint_schema(constraints, db.arities)
    except SchemaError as e:
        raise InputError(f"{args.constraints}:{e.line}: {e.message}") from None
    try:
        check_query_schema(q, db.arities)
    except SchemaError as e:
        raise InputError(f"{args.query}:{e.line}: {e.message}") from None
    return Inputs(db, constraints, q, (time.perf_counter() - t0) * 1000)


def _count(args, inp: Inputs) -> count_mod.CountResult:
    res = count_mod.count_all(
        inp.db, inp.constraints, inp.q,
        heuristic=args.heuristic, force=args.force, keep_tables=args.trace,
        threads=threads_from_env(),
    )
    res.timings_ms["parse"] = inp.parse_ms
    if args.trace:
        labels = ("all repairs (false query)", "repairs falsifying the query")
        for label, run in zip(labels, res.runs):
            print(f"# {label}", file=sys.stderr)
            for line in run.trace_lines():
                print(line, file=sys.stderr)
    return res


def _report(res: count_mod.CountResult) -> RunReport:
    st = res.H.stats()
    order = ("parse", "hypergraph", "decompose", "dp")
    return RunReport(
        repairs_total=res.total,
        repairs_falsifying=res.falsifying,
        repairs_satisfying=res.satisfying,
        cqa=res.cqa,
        width_used=res.width,
        bags=len(res.T),
        nodes=st["nodes"],
        conflict_edges=st["conflict_edges"],
        solution_edges=st["solution_edges"],
        timings_ms={k: res.timings_ms[k] for k in order if k in res.timings_ms},
    )


def cmd_count(args) -> int:
    res = _count(args, load(args, need_query=True))
    if args.json:
        print(emit_report(_report(res)))
    else:
        print(f"repairs total:      {res.total}")
        print(f"repairs falsifying: {res.falsifying}")
        print(f"repairs satisfying: {res.satisfying}")
        print(f"decomposition width {res.width}, {len(res.T)} bags")
    return EXIT_OK


def cmd_cqa(args) -> int:
    res = _count(args, load(args, need_query=True))
    if args.json:
        print(emit_report(_report(res)))
    else:
        print("true" if res.cqa else "false")
    return EXIT_OK if res.cqa else EXIT_FALSE


def cmd_graph(args) -> int:
    inp = load(args, need_query=False)
    H = build_solution_conflict(inp.db, inp.constraints, inp.q)
    if args.dot:
        sys.stdout.write(to_dot(primal_graph(H)))
        return EXIT_OK
    st = H.stats()
    if args.json:
        print(json.dumps(st, indent=2))
    else:
        for k, v in st.items():
            print(f"{k}: {v}")
    return EXIT_OK


def cmd_tw(args) -> int:
    inp = load(args, need_query=False)
    H = build_solution_conflict(inp.db, inp.constraints, inp.q)
    T = decompose(H, args.heuristic)
    out = {"heuristic": args.heuristic, "width": T.width, "bags": len(T)}
    if args.exact_max:
        out["exact"] = exact_treewidth(primal_graph(H), args.exact_max)
    if args.export:
        Path(args.export).write_text(T.to_text(), encoding="utf-8")
    if args.json:
        print(json.dumps(out, indent=2))
    else:
        for k, v in out.items():
            print(f"{k}: {v}")
    return EXIT_OK


def cmd_gaifman(args) -> int:
    inp = load(args, need_query=True)
    did = False
    if args.emit_mso:
        kind, k = depfails_arity(inp.constraints)
        sys.stdout.write(emit_mso(kind, inp.q, k))
        did = True
    if args.stats:
        S = build_structure(inp.db, inp.constraints, inp.q)
        G = gaifman_graph(S)
        stats = {"kind": S.kind, "depfails_arity": S.arity, "vertices": G.number_of_nodes(),
                 "edges": G.number_of_edges(), "relations": S.relation_sizes()}
        print(json.dumps(stats, indent=2))
        did = True
    if args.compare_tw or not did:
        m = tw_measures(inp.db, inp.constraints, inp.q, args.heuristic, args.exact_max)
        out = {"tw_H": m.tw_h_exact if m.tw_h_exact is not None else m.tw_h_upper,
               "tw_G": m.tw_g_exact if m.tw_g_exact is not None else m.tw_g_upper,
               "tw_H_upper": m.tw_h_upper, "tw_G_upper": m.tw_g_upper,
               "tw_H_exact": m.tw_h_exact, "tw_G_exact": m.tw_g_exact}
        if args.json:
            print(json.dumps(out, indent=2))
        else:
            for k, v in out.items():
                print(f"{k}: {v}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    inp = load(args, need_query=True)
    total, fals, sat = oracle_counts(inp.db, inp.constraints, inp.q, args.limit)
    if args.json:
        print(json.dumps({"repairs_total": str(total), "repairs_falsifying": str(fals),
                          "repairs_satisfying": str(sat), "cqa": fals == 0}, indent=2))
    else:
        print(f"repairs total:      {total}")
        print(f"repairs falsifying: {fals}")
        print(f"repairs satisfying: {sat}")
    return EXIT_OK


def cmd_gen(args) -> int:
    spec = GenSpec(family=args.family, n=args.n, constraint_kind=args.kind, block_size=args.block_size,
                   domain=args.domain, max_atoms=args.max_atoms, seed=args.seed)
    db, cs, q = generate(spec)
    prefix = args.prefix or f"{args.family}{args.n}"
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for ext, text in (("facts", serialize_database(db)), ("cst", serialize_constraints(cs)),
                      ("q", serialize_query(q))):
        p = out / f"{prefix}.{ext}"
        p.write_text(text, encoding="utf-8")
        print(p)
    return EXIT_OK


def _inputs(p: argparse.ArgumentParser, query_required: bool = False):
    p.add_argument("--db", required=True, help=".facts file")
    p.add_argument("--constraints", help=".cst file (default: no constraints)")
    p.add_argument("--query", required=query_required, help=".q file")
    p.add_argument("--json", action="store_true", help="machine-readable output")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="repairkit", description="Count and decide consistent query answers over database repairs.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    for name, fn, help_ in (("count", cmd_count, "count total/falsifying/satisfying repairs"),
                            ("cqa", cmd_cqa, "decide whether the query holds in every repair")):
        p = sub.add_parser(name, help=help_)
        _inputs(p, query_required=True)
        p.add_argument("--trace", action="store_true", help="print every f/g table entry to stderr")
        p.add_argument("--heuristic", choices=HEURISTICS, default="min-fill")
        p.add_argument("--force", action="store_true", help=f"allow bags over {count_mod.MAX_BAG} facts")
        p.set_defaults(func=fn)

    p = sub.add_parser("graph", help="solution-conflict hypergraph statistics")
    _inputs(p)
    p.add_argument("--dot", action="store_true", help="print the primal graph in DOT format")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("tw", help="decomposition width of the solution-conflict hypergraph")
    _inputs(p)
    p.add_argument("--heuristic", choices=HEURISTICS, default="min-fill")
    p.add_argument("--exact-max", type=int, default=0, metavar="N",
                   help="also compute exact treewidth for components up to N vertices")
    p.add_argument("--export", metavar="FILE", help="write the decomposition as text")
    p.set_defaults(func=cmd_tw)

    p = sub.add_parser("gaifman", help="Gaifman structure, MSO sentence, treewidth comparison")
    _inputs(p, query_required=True)
    p.add_argument("--emit-mso", action="store_true")
    p.add_argument("--stats", action="store_true")
    p.add_argument("--compare-tw", action="store_true")
    p.add_argument("--heuristic", choices=HEURISTICS, default="min-fill")
    p.add_argument("--exact-max", type=int, default=12, metavar="N")
    p.set_defaults(func=cmd_gaifman)

    p = sub.add_parser("oracle", help="brute-force repair counts")
    _inputs(p, query_required=True)
    p.add_argument("--limit", type=int, default=DEFAULT_LIMIT)
    p.add_argument("--trace", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("--heuristic", choices=HEURISTICS, default="min-fill", help=argparse.SUPPRESS)
    p.add_argument("--force", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gen", help="write a generated instance as .facts/.cst/.q")
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("n", type=int, help="family size (random: number of facts)")
    p.add_argument("--kind", choices=CONSTRAINT_KINDS, default="fd", help="random family constraint kind")
    p.add_argument("--block-size", type=int, default=3)
    p.add_argument("--domain", type=int, default=3)
    p.add_argument("--max-atoms", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")
    p.add_argument("--prefix")
    p.set_defaults(func=cmd_gen)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ParseError, InputError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except SchemaError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except SizeGuardError as e:
        print(f"refused: {e}", file=sys.stderr)
        return EXIT_GUARD
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
