"""Complete unifiers, maximal complete instantiations and k-MCSs."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations_with_replacement, permutations, product
from typing import Iterator

from .completeness import TCSet, TCStatement, _as_tcset, is_acyclic
from .errors import CyclicTCS
from .query import ConjunctiveQuery, _require_safe, contained, minimize
from .terms import Atom, Const, Substitution, UnionFind, Var


@dataclass(frozen=True)
class MatchChoice:
    """Per body atom: the statement index and, per condition atom, the body atom it lands on."""

    statements: tuple[int, ...]
    targets: tuple[tuple[int, ...], ...]

    def describe(self, q: ConjunctiveQuery, cs: TCSet) -> list[dict]:
        out = []
        for atom, si, tg in zip(q.body, self.statements, self.targets):
            stmt = cs[si]
            out.append(
                {
                    "atom": str(atom),
                    "statement": stmt.label or f"#{si}",
                    "condition_targets": [str(q.body[t]) for t in tg],
                }
            )
        return out


@dataclass(frozen=True)
class Budget:
    max_extensions: int | None = None
    max_unifiers: int | None = None
    time_limit: float | None = None


class _BudgetHit(Exception):
    pass


class _Tracker:
    def __init__(self, budget: Budget | None):
        self.budget = budget or Budget()
        self.start = time.monotonic()
        self.unifiers = 0
        self.extensions = 0
        self._ticks = 0

    def tick(self) -> None:
        self._ticks += 1
        if self.budget.time_limit is not None and self._ticks % 64 == 0:
            self.check_time()

    def check_time(self) -> None:
        if self.budget.time_limit is not None and time.monotonic() - self.start > self.budget.time_limit:
            raise _BudgetHit("time")

    def unifier(self) -> None:
        self.unifiers += 1
        if self.budget.max_unifiers is not None and self.unifiers > self.budget.max_unifiers:
            raise _BudgetHit("unifiers")

    def extension(self) -> None:
        self.extensions += 1
        if self.budget.max_extensions is not None and self.extensions > self.budget.max_extensions:
            raise _BudgetHit("extensions")
        self.check_time()


@dataclass(frozen=True)
class Specialization:
    query: ConjunctiveQuery
    extension_size: int
    choice: MatchChoice
    unifier: Substitution
    source: ConjunctiveQuery | None = None

    def provenance(self, cs) -> list[dict]:
        """Per atom of the matched query: the statement used and its condition targets."""
        return self.choice.describe(self.source, _as_tcset(cs)) if self.source is not None else []


@dataclass
class SpecializationResult:
    found: list[Specialization] = field(default_factory=list)
    pruned_count: int = 0
    budget_exhausted: bool = False

    @property
    def queries(self) -> list[ConjunctiveQuery]:
        return [s.query for s in self.found]

    def __len__(self) -> int:
        return len(self.found)


def _rename_statement(c: TCStatement, tag: str) -> TCStatement:
    ren = Substitution({v: Var(f"__{tag}_{v.name}") for v in c.variables()}, normalize=False)
    return TCStatement(ren.atom(c.head), [ren.atom(a) for a in c.condition], c.label)


def _unifier_search(
    q: ConjunctiveQuery, cs: TCSet, tracker: _Tracker, symmetric: list[list[int]] = ()
) -> Iterator[tuple[Substitution, MatchChoice]]:
    """Breadth-first over body atoms, merging states that agree on q's variables.

    ``symmetric`` lists groups of interchangeable body atoms (fresh atoms of
    one relation); states that differ only by permuting those are merged too,
    so only one unifier per isomorphism class is produced for them.
    """
    body = q.body
    qvars = q.variables()
    # options[i]: (statement index, renamed statement, candidate targets per condition atom)
    options: list[list[tuple[int, TCStatement, list[list[int]]]]] = []
    for i, a in enumerate(body):
        opts = []
        for si, stmt in enumerate(cs):
            if stmt.head.relation != a.relation or stmt.head.arity != a.arity:
                continue
            ren = _rename_statement(stmt, f"{i}_{si}")
            cand = [
                [j for j, b in enumerate(body) if b.relation == g.relation and b.arity == g.arity]
                for g in ren.condition
            ]
            if all(cand):
                opts.append((si, ren, cand))
        if not opts:
            return
        options.append(opts)

    grouped = {i for g in symmetric for i in g}
    order = [i for g in symmetric for i in g]
    order += sorted((i for i in range(len(body)) if i not in grouped), key=lambda i: len(options[i]))
    qvars = sorted(qvars, key=lambda v: v.name)
    done: set[int] = set()

    pos = {v: n for n, v in enumerate(qvars)}

    def renamings() -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        """Position maps (inverse, forward) for every permutation of processed symmetric atoms."""
        per_group = []
        for g in symmetric:
            members = [i for i in g if i in done]
            per_group.append([dict(zip(members, p)) for p in permutations(members)])
        out = []
        for combo in product(*per_group):
            fwd = list(range(len(qvars)))
            for perm in combo:
                for src, dst in perm.items():
                    for x, y in zip(body[src].args, body[dst].args):
                        fwd[pos[x]] = pos[y]
            inv = [0] * len(fwd)
            for x, y in enumerate(fwd):
                inv[y] = x
            out.append((tuple(inv), tuple(fwd)))
        return out

    def key(uf: UnionFind, maps) -> tuple:
        # a state is the class of each query variable: a constant or the position of its representative
        val = []
        for v in qvars:
            t = uf.resolve(v)
            val.append(t if isinstance(t, Const) else pos[t])
        raw = tuple(val)
        if raw in memo:
            return memo[raw]
        best = None
        for inv, fwd in maps:
            ids: dict[int, int] = {}
            labels = []
            for u in range(len(val)):
                t = val[inv[u]]
                labels.append(("c", t.name) if isinstance(t, Const) else ("v", ids.setdefault(fwd[t], len(ids))))
            cand = tuple(labels)
            if best is None or cand < best:
                best = cand
        memo[raw] = best
        return best

    # Later atoms only see the query variables (statement copies are renamed
    # apart), so states agreeing on them have identical futures; keep one each.
    states: dict[tuple, tuple[UnionFind, dict[int, tuple[int, tuple[int, ...]]]]] = {(): (UnionFind(), {})}
    for i in order:
        done.add(i)
        inverses = renamings()
        memo: dict[tuple, tuple] = {}
        nxt: dict = {}
        for uf, picks in states.values():
            for si, ren, cand in options[i]:
                tracker.tick()
                uf2 = uf.copy()
                if not uf2.unify_atoms(body[i], ren.head):
                    continue
                partial = [(uf2, ())]
                for g, targets in zip(ren.condition, cand):
                    grown = []
                    for u, acc in partial:
                        for j in targets:
                            tracker.tick()
                            u2 = u.copy()
                            if u2.unify_atoms(g, body[j]):
                                grown.append((u2, acc + (j,)))
                    partial = grown
                for u, acc in partial:
                    k = key(u, inverses)
                    if k not in nxt:
                        nxt[k] = (u, {**picks, i: (si, acc)})
        states = nxt
        if not states:
            return
    for uf, picks in states.values():
        tracker.unifier()
        choice = MatchChoice(
            tuple(picks[i][0] for i in range(len(body))), tuple(picks[i][1] for i in range(len(body)))
        )
        yield uf.substitution(qvars), choice


def complete_unifiers(q: ConjunctiveQuery, cs) -> set[Substitution]:
    """Most general unifiers of every per-atom statement choice.

    Each body atom is unified with the head of one statement, and every
    condition atom of that statement with some body atom; ``q`` is expected
    to be minimal.
    """
    cs = _as_tcset(cs)
    return {g for g, _ in _unifier_search(q, cs, _Tracker(None))}


def _add_maximal(pool: list[Specialization], cand: Specialization) -> int:
    """Insert into a containment-maximal pool; returns how many queries got dropped."""
    for m in pool:
        if contained(cand.query, m.query):
            return 1
    before = len(pool)
    pool[:] = [m for m in pool if not contained(m.query, cand.query)]
    pool.append(cand)
    return before + 1 - len(pool)


def _instantiations(q, cs, cap, ext_size, tracker, shrink, symmetric=()) -> tuple[list[Specialization], int]:
    seen: dict[ConjunctiveQuery, Specialization] = {}
    for gamma, choice in _unifier_search(q, cs, tracker, symmetric):
        inst = q.substitute(gamma)
        if inst in seen:
            continue
        seen[inst] = Specialization(inst, ext_size, choice, gamma, q)
    out: list[Specialization] = []
    skipped = 0
    for inst, spec in seen.items():
        core = minimize(inst)
        if cap is not None and len(core) > cap:
            skipped += 1
            continue
        if shrink:
            spec = Specialization(core, spec.extension_size, spec.choice, spec.unifier, spec.source)
        out.append(spec)
    return out, skipped


def mci(q: ConjunctiveQuery, cs, size_cap: int | None = None, budget: Budget | None = None) -> SpecializationResult:
    """Maximal complete instantiations of ``q`` (minimized first)."""
    _require_safe(q)
    cs = _as_tcset(cs)
    base = minimize(q)
    result = SpecializationResult()
    tracker = _Tracker(budget)
    pool: list[Specialization] = []
    try:
        cands, skipped = _instantiations(base, cs, size_cap, 0, tracker, shrink=False)
        result.pruned_count += skipped
        for c in cands:
            result.pruned_count += _add_maximal(pool, c)
    except _BudgetHit:
        result.budget_exhausted = True
    result.found = pool
    return result


def fresh_extensions(q: ConjunctiveQuery, cs, m: int) -> Iterator[ConjunctiveQuery]:
    """``q`` plus ``m`` atoms with brand-new variables, one per multiset of relations."""
    cs = _as_tcset(cs)
    sigma = sorted(cs.arities.items())
    for combo in combinations_with_replacement(sigma, m):
        extra = []
        for j, (rel, arity) in enumerate(combo):
            extra.append(Atom(rel, (Var(f"_E{m}_{j}_{p}") for p in range(arity))))
        yield q.with_body(q.body + tuple(extra))


def _fresh_groups(ext: ConjunctiveQuery, m: int) -> list[list[int]]:
    groups: dict[str, list[int]] = {}
    for i, a in enumerate(ext.body):
        if a.args and all(isinstance(t, Var) and t.name.startswith(f"_E{m}_") for t in a.args):
            groups.setdefault(a.relation, []).append(i)
    return [g for g in groups.values() if len(g) > 1]


def k_mcs(q: ConjunctiveQuery, cs, k: int, budget: Budget | None = None) -> SpecializationResult:
    """Complete specializations with at most ``|q| + k`` atoms that are maximal.

    Fresh extensions are processed from the smallest up, and the pool of
    maximal queries is updated after every extension.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    _require_safe(q)
    cs = _as_tcset(cs)
    base = minimize(q)
    n = len(base)
    cap = n + k
    tracker = _Tracker(budget)
    result = SpecializationResult()
    pool: list[Specialization] = []
    try:
        for m in range(max(n + k - 1, 0) + 1):
            for ext in fresh_extensions(base, cs, m):
                tracker.extension()
                cands, skipped = _instantiations(ext, cs, cap, m, tracker, shrink=True, symmetric=_fresh_groups(ext, m))
                result.pruned_count += skipped
                for c in cands:
                    result.pruned_count += _add_maximal(pool, c)
    except _BudgetHit:
        result.budget_exhausted = True
    result.found = pool
    return result


@dataclass(frozen=True)
class SizeBound:
    bound: int
    suggested_k: int | None
    relations: int
    total_atoms: int


def mcs_size_bound(q: ConjunctiveQuery, cs) -> SizeBound:
    """Upper bound on the body size of any MCS, for acyclic statement sets.

    ``|q| * (c + c**2 + ... + c**s)`` where ``c`` is the total number of atoms
    across all statements and ``s`` the number of relations they mention.
    """
    cs = _as_tcset(cs)
    if not is_acyclic(cs):
        raise CyclicTCS("the dependency graph of the statements has a cycle")
    s = len(cs.signature)
    c = cs.total_atoms()
    n = len(q.body)
    bound = n * sum(c**i for i in range(1, s + 1))
    suggested = bound - n if s > 0 and bound >= n else None
    return SizeBound(bound, suggested, s, c)
