"""Table-completeness statements, the T_C operator and the completeness test."""

from __future__ import annotations

from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Iterable, Iterator

from .errors import ArityMismatch
from .query import (
    ConjunctiveQuery,
    _index,
    _require_safe,
    canonical_db,
    frozen_head,
    holds_answer,
    homomorphisms,
)
from .terms import Atom, Var, atom_variables


@dataclass(frozen=True)
class TCStatement:
    """``complete head ; condition`` -- an empty condition means *true*."""

    head: Atom
    condition: tuple[Atom, ...] = ()
    label: str | None = field(default=None, compare=False)

    def __init__(self, head: Atom, condition: Iterable[Atom] = (), label: str | None = None):
        object.__setattr__(self, "head", head)
        object.__setattr__(self, "condition", tuple(sorted(set(condition), key=Atom.sort_key)))
        object.__setattr__(self, "label", label)

    def atoms(self) -> tuple[Atom, ...]:
        return (self.head, *self.condition)

    def variables(self) -> list[Var]:
        return atom_variables(self.atoms())

    def relations(self) -> set[str]:
        return {a.relation for a in self.atoms()}

    def __str__(self) -> str:
        if not self.condition:
            return f"complete {self.head}."
        return f"complete {self.head} ; {', '.join(str(a) for a in self.condition)}."


class TCSet:
    """An ordered collection of statements with unique labels."""

    def __init__(self, statements: Iterable[TCStatement] = ()):
        stmts = list(statements)
        labels = [s.label for s in stmts if s.label is not None]
        if len(labels) != len(set(labels)):
            raise ValueError("statement labels must be unique")
        arities: dict[str, int] = {}
        for s in stmts:
            for a in s.atoms():
                if arities.setdefault(a.relation, a.arity) != a.arity:
                    raise ArityMismatch(f"relation {a.relation} used with arities {arities[a.relation]} and {a.arity}")
        self.statements: tuple[TCStatement, ...] = tuple(stmts)
        self.arities = arities

    def __iter__(self) -> Iterator[TCStatement]:
        return iter(self.statements)

    def __len__(self) -> int:
        return len(self.statements)

    def __getitem__(self, i) -> TCStatement:
        return self.statements[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, TCSet) and self.statements == other.statements

    def __hash__(self) -> int:
        return hash(self.statements)

    def __repr__(self) -> str:
        return f"TCSet({list(self.statements)!r})"

    @property
    def signature(self) -> frozenset[str]:
        return frozenset(self.arities)

    def total_atoms(self) -> int:
        return sum(len(s.atoms()) for s in self.statements)

    def for_relation(self, relation: str, arity: int) -> list[TCStatement]:
        return [s for s in self.statements if s.head.relation == relation and s.head.arity == arity]


def _as_tcset(cs) -> TCSet:
    return cs if isinstance(cs, TCSet) else TCSet(cs)


@dataclass(frozen=True)
class IncompleteDatabase:
    ideal: frozenset[Atom]
    available: frozenset[Atom]

    def __post_init__(self):
        object.__setattr__(self, "ideal", frozenset(self.ideal))
        object.__setattr__(self, "available", frozenset(self.available))
        if not self.available <= self.ideal:
            extra = sorted(self.available - self.ideal, key=Atom.sort_key)
            raise ValueError(f"available facts missing from ideal state: {', '.join(map(str, extra))}")


def tc_query(c: TCStatement) -> ConjunctiveQuery:
    return ConjunctiveQuery(c.label or "q_c", c.head.args, c.atoms())


def apply_tc(c: TCStatement, d: Iterable[Atom]) -> frozenset[Atom]:
    idx = d if isinstance(d, dict) else _index(d)
    head = c.head
    out = set()
    for b in homomorphisms(c.atoms(), idx):
        out.add(Atom(head.relation, (b.get(t, t) if isinstance(t, Var) else t for t in head.args)))
    return frozenset(out)


def apply_tcset(cs, d: Iterable[Atom]) -> frozenset[Atom]:
    """The facts guaranteed to be available when ``d`` is the ideal state."""
    idx = _index(d)
    out: set[Atom] = set()
    for c in _as_tcset(cs):
        out |= apply_tc(c, idx)
    return frozenset(out)


def satisfies(idb: IncompleteDatabase, c) -> bool:
    """Whether ``idb`` satisfies a statement, or every statement of a set."""
    if isinstance(c, TCStatement):
        return apply_tc(c, idb.ideal) <= idb.available
    return apply_tcset(c, idb.ideal) <= idb.available


def is_complete(q: ConjunctiveQuery, cs) -> bool:
    """Whether ``cs`` entails completeness of ``q``.

    Holds iff the frozen head is still an answer of ``q`` over
    ``T_C(D_Q)``, the part of the canonical database the statements vouch for.
    """
    _require_safe(q)
    return holds_answer(q, apply_tcset(cs, canonical_db(q)), frozen_head(q))


def dependency_graph(cs) -> dict[str, set[str]]:
    """Edges from a statement's head relation to its condition relations."""
    graph: dict[str, set[str]] = {r: set() for r in sorted(_as_tcset(cs).signature)}
    for s in _as_tcset(cs):
        graph[s.head.relation].update(a.relation for a in s.condition)
    return graph


def is_acyclic(cs) -> bool:
    try:
        tuple(TopologicalSorter(dependency_graph(cs)).static_order())
    except CycleError:
        return False
    return True
