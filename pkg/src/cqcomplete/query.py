"""Conjunctive queries: evaluation, containment, minimization."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator

from .errors import ArityMismatch, UnsafeQuery
from .terms import (
    Atom,
    Const,
    Frozen,
    Substitution,
    Term,
    Var,
    atom_variables,
    freeze,
    freeze_term,
    term_key,
)


@dataclass(frozen=True)
class ConjunctiveQuery:
    """``name(head) :- body``.

    The body is kept as a sorted, duplicate-free tuple so that two queries
    with the same atoms compare equal and print the same way.  Unsafe heads
    are only allowed on queries flagged ``generalized``.
    """

    name: str = field(compare=False)
    head: tuple[Term, ...]
    body: tuple[Atom, ...]
    generalized: bool = field(default=False, compare=False)

    def __init__(self, name: str, head: Iterable[Term], body: Iterable[Atom], generalized: bool = False):
        head = tuple(head)
        body = tuple(sorted(set(body), key=Atom.sort_key))
        for t in head:
            if isinstance(t, Frozen):
                raise ValueError("frozen terms cannot appear in a query")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "head", head)
        object.__setattr__(self, "body", body)
        safe = _is_safe(head, body)
        if not safe and not generalized:
            missing = ", ".join(str(v) for v in _unsafe_vars(head, body))
            raise UnsafeQuery(f"query {name} is unsafe: head variable(s) {missing} not in body")
        object.__setattr__(self, "generalized", generalized or not safe)

    @property
    def arity(self) -> int:
        return len(self.head)

    @property
    def is_safe(self) -> bool:
        return _is_safe(self.head, self.body)

    def variables(self) -> list[Var]:
        seen = dict.fromkeys(t for t in self.head if isinstance(t, Var))
        seen.update(dict.fromkeys(atom_variables(self.body)))
        return list(seen)

    def constants(self) -> set[Const]:
        out = {t for t in self.head if isinstance(t, Const)}
        out.update(t for a in self.body for t in a.args if isinstance(t, Const))
        return out

    def relations(self) -> set[tuple[str, int]]:
        return {(a.relation, a.arity) for a in self.body}

    def with_body(self, body: Iterable[Atom]) -> "ConjunctiveQuery":
        body = tuple(body)
        return ConjunctiveQuery(self.name, self.head, body, generalized=not _is_safe(self.head, body))

    def renamed(self, name: str) -> "ConjunctiveQuery":
        return ConjunctiveQuery(name, self.head, self.body, self.generalized)

    def substitute(self, s) -> "ConjunctiveQuery":
        head = tuple(s.term(t) for t in self.head)
        body = tuple(s.atom(a) for a in self.body)
        return ConjunctiveQuery(self.name, head, body, generalized=not _is_safe(head, body))

    def __str__(self) -> str:
        head = ",".join(str(t) for t in self.head)
        body = ", ".join(str(a) for a in self.body)
        return f"{self.name}({head}) :- {body}." if body else f"{self.name}({head}) :- true."

    def __len__(self) -> int:
        return len(self.body)


def _unsafe_vars(head, body) -> list[Var]:
    body_vars = {t for a in body for t in a.args}
    return [t for t in head if isinstance(t, Var) and t not in body_vars]


def _is_safe(head, body) -> bool:
    return not _unsafe_vars(head, body)


def _require_safe(q: ConjunctiveQuery) -> None:
    if not q.is_safe:
        raise UnsafeQuery(f"query {q.name} is unsafe")


def _index(facts: Iterable[Atom]) -> dict[tuple[str, int], list[Atom]]:
    idx: dict[tuple[str, int], list[Atom]] = defaultdict(list)
    for f in facts:
        idx[(f.relation, f.arity)].append(f)
    return idx


def _match(atom: Atom, fact: Atom, binding: dict[Var, Term]) -> dict[Var, Term] | None:
    new = None
    for t, g in zip(atom.args, fact.args):
        if isinstance(t, Var):
            cur = binding.get(t)
            if cur is None and new is not None:
                cur = new.get(t)
            if cur is None:
                if new is None:
                    new = {}
                new[t] = g
            elif cur != g:
                return None
        elif t != g:
            return None
    return new if new is not None else {}


def homomorphisms(
    atoms: Iterable[Atom], facts, binding: dict[Var, Term] | None = None
) -> Iterator[dict[Var, Term]]:
    """All extensions of ``binding`` mapping every atom into ``facts``.

    ``facts`` must be ground (or an index from :func:`_index`).  The search
    picks, at every level, the pending atom with the fewest compatible facts
    and backtracks as soon as some pending atom has none left.
    """
    idx = facts if isinstance(facts, dict) else _index(facts)
    pending = list(dict.fromkeys(atoms))
    yield from _search(pending, idx, dict(binding or {}))


def _search(pending: list[Atom], idx, binding: dict[Var, Term]) -> Iterator[dict[Var, Term]]:
    if not pending:
        yield dict(binding)
        return
    best_i = -1
    best: list[dict[Var, Term]] | None = None
    for i, a in enumerate(pending):
        exts = []
        for f in idx.get((a.relation, a.arity), ()):
            ext = _match(a, f, binding)
            if ext is not None:
                exts.append(ext)
        if not exts:
            return
        if best is None or len(exts) < len(best):
            best_i, best = i, exts
            if len(exts) == 1:
                break
    rest = pending[:best_i] + pending[best_i + 1 :]
    seen = set()
    for ext in best:
        key = tuple(sorted(ext.items(), key=lambda kv: kv[0].name))
        if key in seen:
            continue
        seen.add(key)
        binding.update(ext)
        yield from _search(rest, idx, binding)
        for v in ext:
            del binding[v]


def has_homomorphism(atoms: Iterable[Atom], facts, binding: dict[Var, Term] | None = None) -> bool:
    return next(homomorphisms(atoms, facts, binding), None) is not None


def _head_binding(pattern: tuple[Term, ...], target: tuple[Term, ...]) -> dict[Var, Term] | None:
    binding: dict[Var, Term] = {}
    for t, g in zip(pattern, target):
        if isinstance(t, Var):
            cur = binding.get(t)
            if cur is None:
                binding[t] = g
            elif cur != g:
                return None
        elif t != g:
            return None
    return binding


def evaluate(q: ConjunctiveQuery, d: Iterable[Atom]) -> frozenset[tuple[Term, ...]]:
    """Answers of a safe query over a ground instance."""
    _require_safe(q)
    idx = _index(d)
    return frozenset(tuple(b.get(t, t) if isinstance(t, Var) else t for t in q.head) for b in homomorphisms(q.body, idx))


def holds_answer(q: ConjunctiveQuery, d, answer: tuple[Term, ...]) -> bool:
    """Whether ``answer`` is among the answers of ``q`` over ``d``.

    Works for unsafe queries too: head variables missing from the body are
    simply pinned to the requested value.
    """
    if len(answer) != len(q.head):
        return False
    binding = _head_binding(q.head, answer)
    if binding is None:
        return False
    return has_homomorphism(q.body, d, binding)


def canonical_db(q: ConjunctiveQuery) -> frozenset[Atom]:
    return freeze(q.body)


def frozen_head(q: ConjunctiveQuery) -> tuple[Term, ...]:
    return tuple(freeze_term(t) for t in q.head)


def contained(q: ConjunctiveQuery, q2: ConjunctiveQuery) -> bool:
    """``q ⊑ q2``: some homomorphism maps q2 into q, head onto head."""
    if q.arity != q2.arity:
        raise ArityMismatch(f"{q.name}/{q.arity} vs {q2.name}/{q2.arity}")
    if not _quick_maybe_contained(q, q2):
        return False
    return holds_answer(q2, canonical_db(q), frozen_head(q))


def _quick_maybe_contained(q, q2) -> bool:
    # every relation used by q2 must occur in q
    rels = q.relations()
    return all((a.relation, a.arity) in rels for a in q2.body)


def equivalent(q: ConjunctiveQuery, q2: ConjunctiveQuery) -> bool:
    if q.arity != q2.arity:
        raise ArityMismatch(f"{q.name}/{q.arity} vs {q2.name}/{q2.arity}")
    if q.relations() != q2.relations():
        return False
    return contained(q, q2) and contained(q2, q)


def minimize(q: ConjunctiveQuery) -> ConjunctiveQuery:
    """Greedy core: drop atoms in canonical order while equivalence holds."""
    current = list(q.body)
    for a in q.body:
        trial = [b for b in current if b != a]
        cand = q.with_body(trial)
        if not cand.is_safe and q.is_safe:
            continue
        # cand ⊒ current always holds; only the reverse direction needs a check
        if holds_answer(q.with_body(current), canonical_db(cand), frozen_head(cand)):
            current = trial
    return q.with_body(current)


def subqueries(q: ConjunctiveQuery) -> Iterator[ConjunctiveQuery]:
    body = q.body
    for r in range(len(body) + 1):
        for sub in combinations(body, r):
            yield q.with_body(sub)


def shape_key(q: ConjunctiveQuery) -> tuple:
    """Cheap invariant of equivalent minimal queries (used as a pre-filter)."""
    rels = Counter((a.relation, a.arity) for a in q.body)
    head_shape = tuple(term_key(t) if not isinstance(t, Var) else (2, "") for t in q.head)
    return (tuple(sorted(rels.items())), head_shape)


def canonical_form(q: ConjunctiveQuery) -> ConjunctiveQuery:
    """Rename variables V0, V1, ... in first-occurrence order (head, then body).

    Two renaming passes make the result stable under most reorderings; it is
    a dedup key, not a complete isomorphism test.
    """
    cur = q
    for _ in range(2):
        order = dict.fromkeys(t for t in cur.head if isinstance(t, Var))
        order.update(dict.fromkeys(atom_variables(cur.body)))
        ren = {v: Var(f"V{i}") for i, v in enumerate(order)}
        cur = cur.substitute(Substitution(ren, normalize=False))
    return cur
