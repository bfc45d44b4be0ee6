"""Completeness reasoning for conjunctive queries under table-completeness statements."""

from .completeness import (
    IncompleteDatabase,
    TCSet,
    TCStatement,
    apply_tc,
    apply_tcset,
    dependency_graph,
    is_acyclic,
    is_complete,
    satisfies,
    tc_query,
)
from .errors import ArityMismatch, BoundsTooLarge, CQError, CyclicTCS, ParseError, UnsafeQuery
from .generalization import GeneralizationTrace, gc_step, mcg
from .query import (
    ConjunctiveQuery,
    canonical_db,
    contained,
    equivalent,
    evaluate,
    minimize,
    subqueries,
)
from .specialization import (
    Budget,
    MatchChoice,
    SpecializationResult,
    complete_unifiers,
    fresh_extensions,
    k_mcs,
    mci,
    mcs_size_bound,
)
from .terms import Atom, Const, Frozen, Substitution, Var, apply, compose, freeze, mgu, unfreeze

__version__ = "0.1.0"
