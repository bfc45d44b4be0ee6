"""Minimal complete generalization by iterating the G_C operator."""

from __future__ import annotations

from dataclasses import dataclass, field

from .completeness import apply_tcset
from .query import ConjunctiveQuery, _require_safe, canonical_db
from .terms import Atom, unfreeze


def gc_step(q: ConjunctiveQuery, cs) -> ConjunctiveQuery:
    """Keep the body atoms whose frozen copies survive ``T_C``.

    The result may be unsafe even for a safe input; it is then flagged
    ``generalized``.
    """
    kept = unfreeze(apply_tcset(cs, canonical_db(q)))
    return q.with_body(kept)


@dataclass(frozen=True)
class TraceStep:
    index: int
    query: ConjunctiveQuery
    removed: tuple[Atom, ...]


@dataclass
class GeneralizationTrace:
    steps: list[TraceStep] = field(default_factory=list)
    outcome: str = "mcg"  # or "no-mcg-unsafe"
    result: ConjunctiveQuery | None = None

    def __len__(self) -> int:
        return len(self.steps)


def mcg(q: ConjunctiveQuery, cs) -> tuple[ConjunctiveQuery | None, GeneralizationTrace]:
    """Iterate ``gc_step`` until it stops removing atoms or loses safety."""
    _require_safe(q)
    trace = GeneralizationTrace()

    def step(prev: ConjunctiveQuery) -> ConjunctiveQuery:
        nxt = gc_step(prev, cs)
        removed = tuple(a for a in prev.body if a not in set(nxt.body))
        trace.steps.append(TraceStep(len(trace.steps) + 1, nxt, removed))
        return nxt

    old, new = q, step(q)
    while new.is_safe and new != old:
        old, new = new, step(new)
    if not new.is_safe:
        trace.outcome = "no-mcg-unsafe"
        return None, trace
    trace.result = new
    return new, trace
