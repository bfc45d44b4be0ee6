"""Brute-force reference checks.

Nothing here calls the engine's homomorphism search, T_C operator or
unifier code; everything is recomputed by plain enumeration so the two can
be compared.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterable, Iterator

from .completeness import IncompleteDatabase, TCSet, TCStatement
from .errors import BoundsTooLarge
from .query import ConjunctiveQuery
from .terms import Atom, Const, Frozen, Term, Var


@dataclass(frozen=True)
class EnumerationBounds:
    constants: tuple[Const, ...]
    max_facts_per_relation: int = 2
    max_body_atoms: int = 4
    max_fact_space: int = 24
    max_assignments: int = 2_000_000

    def __post_init__(self):
        if not self.constants or self.max_facts_per_relation < 1 or self.max_body_atoms < 1:
            raise ValueError("enumeration bounds must be positive")

    @classmethod
    def for_inputs(
        cls, queries: Iterable[ConjunctiveQuery] = (), cs: Iterable[TCStatement] = (), extra: int | None = None, **kw
    ):
        """Pool = every constant mentioned in the inputs plus ``extra`` fresh ones.

        By default there are at least two fresh constants and at least one per
        variable of the widest query, enough to host its canonical database.
        """
        queries = list(queries)
        if extra is None:
            extra = max([2, *(len(q.variables()) for q in queries)])
        seen: dict[Const, None] = {}
        for q in queries:
            for t in (*q.head, *(x for a in q.body for x in a.args)):
                if isinstance(t, Const):
                    seen.setdefault(t)
        for c in cs:
            for a in c.atoms():
                for t in a.args:
                    if isinstance(t, Const):
                        seen.setdefault(t)
        pool = sorted(seen, key=lambda c: c.name)
        i = 0
        while extra > 0:
            c = Const(f"k{i}")
            i += 1
            if c not in seen:
                pool.append(c)
                extra -= 1
        return cls(tuple(pool), **kw)

    @classmethod
    def for_specializations(cls, q: ConjunctiveQuery, cs: Iterable[TCStatement], **kw):
        """Only the mentioned constants (a maximal specialization never needs others)."""
        cs = list(cs)
        return cls.for_inputs([q], cs, extra=0 if _mentions_constants(q, cs) else 1, **kw)


@dataclass
class OracleVerdict:
    holds: bool
    witness: IncompleteDatabase | None = None
    missing: frozenset = field(default_factory=frozenset)

    def __bool__(self) -> bool:
        return self.holds


def _mentions_constants(q, cs) -> bool:
    terms = [*q.head, *(t for a in q.body for t in a.args), *(t for c in cs for a in c.atoms() for t in a.args)]
    return any(isinstance(t, Const) for t in terms)


# -- naive evaluation ------------------------------------------------------------


def _matches(atoms: list[Atom], facts: frozenset[Atom], binding: dict) -> Iterator[dict]:
    """Plain left-to-right depth-first matching of ``atoms`` into ``facts``."""
    if not atoms:
        yield binding
        return
    first, rest = atoms[0], atoms[1:]
    for f in facts:
        if f.relation != first.relation or len(f.args) != len(first.args):
            continue
        b = dict(binding)
        ok = True
        for t, g in zip(first.args, f.args):
            if isinstance(t, Var):
                if b.setdefault(t, g) != g:
                    ok = False
                    break
            elif t != g:
                ok = False
                break
        if ok:
            yield from _matches(rest, facts, b)


def naive_answers(q: ConjunctiveQuery, facts: Iterable[Atom]) -> set[tuple[Term, ...]]:
    facts = frozenset(facts)
    return {tuple(b.get(t, t) for t in q.head) for b in _matches(list(q.body), facts, {})}


def naive_tc(cs: Iterable[TCStatement], facts: Iterable[Atom]) -> frozenset[Atom]:
    facts = frozenset(facts)
    out = set()
    for c in cs:
        for b in _matches([c.head, *c.condition], facts, {}):
            out.add(Atom(c.head.relation, (b.get(t, t) for t in c.head.args)))
    return frozenset(out)


def _fix(q: ConjunctiveQuery, answer: tuple[Term, ...]) -> dict | None:
    b: dict = {}
    for t, g in zip(q.head, answer):
        if isinstance(t, Var):
            if b.setdefault(t, g) != g:
                return None
        elif t != g:
            return None
    return b


def naive_has_answer(q: ConjunctiveQuery, facts: Iterable[Atom], answer: tuple[Term, ...]) -> bool:
    b = _fix(q, answer)
    if b is None:
        return False
    return next(_matches(list(q.body), frozenset(facts), b), None) is not None


# -- instance enumeration ----------------------------------------------------------


def _schema(queries: Iterable[ConjunctiveQuery], cs: Iterable[TCStatement]) -> list[tuple[str, int]]:
    rels = set()
    for q in queries:
        rels |= {(a.relation, a.arity) for a in q.body}
    for c in cs:
        rels |= {(a.relation, a.arity) for a in c.atoms()}
    return sorted(rels)


def _assignments(variables: list[Var], pool: tuple[Const, ...], limit: int) -> Iterator[dict]:
    if len(pool) ** len(variables) > limit:
        raise BoundsTooLarge(f"{len(pool)}^{len(variables)} assignments exceed {limit}")
    for values in product(pool, repeat=len(variables)):
        yield dict(zip(variables, values))


def _ground(atoms, b) -> frozenset[Atom]:
    return frozenset(Atom(a.relation, (b.get(t, t) for t in a.args)) for a in atoms)


def _all_instances(schema, bounds: EnumerationBounds) -> Iterator[frozenset[Atom]]:
    per_rel = []
    total = 0
    for rel, arity in schema:
        facts = [Atom(rel, args) for args in product(bounds.constants, repeat=arity)]
        total += len(facts)
        per_rel.append(facts)
    if total > bounds.max_fact_space:
        raise BoundsTooLarge(f"fact space of {total} facts exceeds {bounds.max_fact_space}")
    choices = [
        [c for r in range(min(bounds.max_facts_per_relation, len(facts)) + 1) for c in combinations(facts, r)]
        for facts in per_rel
    ]
    for pick in product(*choices):
        yield frozenset(f for group in pick for f in group)


def _ideal_instances(q: ConjunctiveQuery, schema, bounds: EnumerationBounds, exhaustive: bool):
    if exhaustive:
        yield from _all_instances(schema, bounds)
        return
    # Any counterexample over the pool shrinks to the image of q's body under
    # one satisfying assignment, so those images are the only ideal states
    # that need checking.
    for b in _assignments(q.variables(), bounds.constants, bounds.max_assignments):
        yield _ground(q.body, b)


def oracle_entails_complete(
    q: ConjunctiveQuery, cs: Iterable[TCStatement], bounds: EnumerationBounds, exhaustive: bool = False
) -> OracleVerdict:
    """Search ideal states over the pool for one where ``q`` loses an answer.

    The available state is always the smallest one the statements allow.
    """
    cs = list(cs)
    schema = _schema([q], cs)
    for ideal in _ideal_instances(q, schema, bounds, exhaustive):
        available = naive_tc(cs, ideal)
        lost = naive_answers(q, ideal) - naive_answers(q, available)
        if lost:
            return OracleVerdict(False, IncompleteDatabase(ideal, available), frozenset(lost))
    return OracleVerdict(True)


def oracle_containment(
    q: ConjunctiveQuery, q2: ConjunctiveQuery, bounds: EnumerationBounds, exhaustive: bool = False
) -> OracleVerdict:
    """Whether ``q(D) ⊆ q2(D)`` on every instance over the pool."""
    schema = _schema([q, q2], [])
    for d in _ideal_instances(q, schema, bounds, exhaustive):
        lost = naive_answers(q, d) - naive_answers(q2, d)
        if lost:
            return OracleVerdict(False, IncompleteDatabase(d, d), frozenset(lost))
    return OracleVerdict(True)


# -- specializations ------------------------------------------------------------------


def _freeze(atoms):
    return frozenset(Atom(a.relation, (Frozen(t.name) if isinstance(t, Var) else t for t in a.args)) for a in atoms)


def _frozen_head(q):
    return tuple(Frozen(t.name) if isinstance(t, Var) else t for t in q.head)


def naive_contained(q: ConjunctiveQuery, q2: ConjunctiveQuery) -> bool:
    """``q ⊑ q2`` by matching q2 into the frozen body of q."""
    return naive_has_answer(q2, _freeze(q.body), _frozen_head(q))


def naive_complete(q: ConjunctiveQuery, cs: Iterable[TCStatement]) -> bool:
    return naive_has_answer(q, naive_tc(cs, _freeze(q.body)), _frozen_head(q))


def _growth(n: int, fixed: list[Term], consts: tuple[Const, ...], prefix: str) -> Iterator[tuple[Term, ...]]:
    """Term tuples of length n: constants, existing terms, or new variables in order."""

    def rec(i, acc, fresh):
        if i == n:
            yield tuple(acc)
            return
        for t in (*consts, *fixed, *(Var(f"{prefix}{j}") for j in range(fresh))):
            yield from rec(i + 1, acc + [t], fresh)
        yield from rec(i + 1, acc + [Var(f"{prefix}{fresh}")], fresh + 1)

    yield from rec(0, [], 0)


def _extra_atoms(schema, existing: list[Var], consts, slots: int) -> Iterator[tuple[Atom, ...]]:
    """All lists of up to ``slots`` atoms over the schema (relation-sorted to cut repeats)."""
    for size in range(slots + 1):
        for rels in product(range(len(schema)), repeat=size):
            if list(rels) != sorted(rels):
                continue
            arity_total = sum(schema[r][1] for r in rels)
            for terms in _growth(arity_total, existing, consts, "W"):
                atoms, pos = [], 0
                for r in rels:
                    name, ar = schema[r]
                    atoms.append(Atom(name, terms[pos : pos + ar]))
                    pos += ar
                yield tuple(atoms)


def _canon(q: ConjunctiveQuery) -> ConjunctiveQuery:
    order: dict[Var, None] = {}
    for t in q.head:
        if isinstance(t, Var):
            order.setdefault(t)
    for a in q.body:
        for t in a.args:
            if isinstance(t, Var):
                order.setdefault(t)
    ren = {v: Var(f"V{i}") for i, v in enumerate(order)}
    return ConjunctiveQuery(
        q.name, (ren.get(t, t) for t in q.head), (Atom(a.relation, (ren.get(t, t) for t in a.args)) for a in q.body)
    )


def _maximal(queries: list[ConjunctiveQuery]) -> list[ConjunctiveQuery]:
    out: list[ConjunctiveQuery] = []
    for i, c in enumerate(queries):
        dominated = False
        for j, d in enumerate(queries):
            if i == j or not naive_contained(c, d):
                continue
            # strictly below d, or equivalent to an earlier representative
            if not naive_contained(d, c) or j < i:
                dominated = True
                break
        if not dominated:
            out.append(c)
    return out


def oracle_specializations(
    q: ConjunctiveQuery, cs: Iterable[TCStatement], max_size: int, bounds: EnumerationBounds, limit: int = 400_000
) -> list[ConjunctiveQuery]:
    """Maximal complete specializations of ``q`` with at most ``max_size`` atoms.

    Every specialization is ``h(q)`` plus extra atoms for some homomorphism
    ``h``, so candidates are generated that way: all ``h`` into new variables
    and pool constants, then all extra atoms over the schema.
    """
    cs = list(cs)
    schema = _schema([q], cs)
    consts = tuple(bounds.constants)
    qvars = q.variables()
    found: dict[ConjunctiveQuery, None] = {}
    count = 0
    for image in _growth(len(qvars), [], consts, "U"):
        h = dict(zip(qvars, image))
        body = _ground(q.body, h)
        if len(body) > max_size:
            continue
        head = tuple(h.get(t, t) for t in q.head)
        existing = sorted({t for a in body for t in a.args if isinstance(t, Var)}, key=lambda v: v.name)
        for extra in _extra_atoms(schema, existing, consts, max_size - len(body)):
            count += 1
            if count > limit:
                raise BoundsTooLarge(f"more than {limit} candidate specializations")
            full = body | frozenset(extra)
            if len(full) > max_size:
                continue
            cand = ConjunctiveQuery(q.name, head, full)
            if naive_complete(cand, cs):
                found.setdefault(_canon(cand))
    return _maximal(list(found))
