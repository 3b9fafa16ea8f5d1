"""Counting subset-repairs and consistent query answers over tree decompositions."""

from __future__ import annotations

from .count import CountResult, count_all, count_satisfying, cqa_decide, max_rep, number_falsify, run_dp
from .errors import (
    InvalidDecompositionError,
    NotPrimaryKeyError,
    ParseError,
    PreconditionError,
    RepairKitError,
    SchemaError,
    SizeGuardError,
    UnsafeVariableError,
)
from .gaifman import build_structure, emit_mso, gaifman_graph, mso_for, tw_measures
from .generators import GenSpec, gen_bipartite, gen_chain, gen_path, gen_random, generate
from .hypergraphs import (
    LabeledHypergraph,
    build_conflict,
    build_solution_conflict,
    minimal_conflicts,
    minimal_solutions,
    primal_graph,
)
from .oracle import check_mis_correspondence, enumerate_repairs, oracle_counts
from .relational import (
    DC,
    FALSE,
    FD,
    Atom,
    Comparison,
    Database,
    Disjunct,
    Fact,
    Key,
    Query,
    Var,
    evaluate_query,
    fact,
    satisfies_constraints,
)
from .textio import parse_constraints, parse_database, parse_query
from .treedec import RootedDecomposition, decompose, exact_treewidth, root_and_order, validate

__version__ = "0.1.0"
