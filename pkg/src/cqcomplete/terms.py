"""Terms, atoms, substitutions and flat unification."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

_PLAIN_CONST = re.compile(r"[a-z][a-z0-9_]*|[0-9]+")


@dataclass(frozen=True)
class Var:
    name: str

    def __hash__(self) -> int:
        return hash(self.name)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    name: str

    def __hash__(self) -> int:
        return hash(self.name)

    def __str__(self) -> str:
        return render_constant(self.name)


@dataclass(frozen=True)
class Frozen:
    """The frozen copy of a variable; only lives inside database instances."""

    name: str

    def __hash__(self) -> int:
        return hash(self.name)

    def __str__(self) -> str:
        return "~" + self.name


Term = Union[Var, Const, Frozen]

_KIND_RANK = {Const: 0, Frozen: 1, Var: 2}


def term_key(t: Term) -> tuple[int, str]:
    return (_KIND_RANK[type(t)], t.name)


def is_ground(t: Term) -> bool:
    return not isinstance(t, Var)


def render_constant(name: str) -> str:
    if _PLAIN_CONST.fullmatch(name):
        return name
    return "'" + name + "'"


@dataclass(frozen=True)
class Atom:
    relation: str
    args: tuple[Term, ...]

    def __init__(self, relation: str, args: Iterable[Term]):
        object.__setattr__(self, "relation", relation)
        object.__setattr__(self, "args", tuple(args))

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> tuple[Var, ...]:
        return tuple(t for t in self.args if isinstance(t, Var))

    def is_ground(self) -> bool:
        return all(is_ground(t) for t in self.args)

    def sort_key(self):
        return (self.relation, len(self.args), tuple(term_key(t) for t in self.args))

    def __str__(self) -> str:
        return f"{self.relation}({','.join(str(t) for t in self.args)})"


def atom_variables(atoms: Iterable[Atom]) -> list[Var]:
    """Variables of ``atoms`` in first-occurrence order."""
    seen: dict[Var, None] = {}
    for a in atoms:
        for t in a.args:
            if isinstance(t, Var):
                seen.setdefault(t)
    return list(seen)


class Substitution:
    """Finite map from variables to terms, normalized to idempotent form.

    Chains such as ``{X: Y, Y: c}`` are resolved when the substitution is
    built, so ``X`` ends up bound to ``c``.  Cycles among variables collapse
    onto the lexicographically least variable of the cycle.
    """

    __slots__ = ("_map", "_hash")

    def __init__(self, bindings: Mapping[Var, Term] | None = None, *, normalize: bool = True):
        raw = dict(bindings or {})
        for v in raw:
            if not isinstance(v, Var):
                raise TypeError(f"substitution key must be a variable, got {v!r}")
        self._map = _resolve(raw) if normalize else {v: t for v, t in raw.items() if v != t}
        self._hash = None

    @classmethod
    def _trusted(cls, mapping: dict[Var, Term]) -> "Substitution":
        s = cls.__new__(cls)
        s._map = mapping
        s._hash = None
        return s

    def __getitem__(self, v: Var) -> Term:
        return self._map[v]

    def get(self, v: Var, default=None):
        return self._map.get(v, default)

    def __contains__(self, v) -> bool:
        return v in self._map

    def __iter__(self):
        return iter(self._map)

    def __len__(self) -> int:
        return len(self._map)

    def items(self):
        return self._map.items()

    def as_dict(self) -> dict[Var, Term]:
        return dict(self._map)

    def domain(self) -> frozenset[Var]:
        return frozenset(self._map)

    def __eq__(self, other) -> bool:
        return isinstance(other, Substitution) and self._map == other._map

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._map.items()))
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(f"{v}↦{t}" for v, t in sorted(self._map.items(), key=lambda kv: kv[0].name))
        return "{" + inner + "}"

    def restrict(self, variables: Iterable[Var]) -> "Substitution":
        keep = set(variables)
        return Substitution._trusted({v: t for v, t in self._map.items() if v in keep})

    def term(self, t: Term) -> Term:
        if isinstance(t, Var):
            return self._map.get(t, t)
        return t

    def atom(self, a: Atom) -> Atom:
        m = self._map
        if not m:
            return a
        return Atom(a.relation, (m.get(t, t) if isinstance(t, Var) else t for t in a.args))

    def __call__(self, x):
        return apply(self, x)



def _resolve(raw: dict[Var, Term]) -> dict[Var, Term]:
    out: dict[Var, Term] = {}
    for start in raw:
        seen = [start]
        cur: Term = raw[start]
        while isinstance(cur, Var) and cur in raw and cur not in seen:
            seen.append(cur)
            cur = raw[cur]
        if isinstance(cur, Var) and cur in seen:
            # cycle: every member collapses onto the least variable in it
            cycle = seen[seen.index(cur):]
            cur = min(cycle, key=lambda v: v.name)
        out[start] = cur
    return {v: t for v, t in out.items() if v != t}


IDENTITY = Substitution()


def apply(s: Substitution, x):
    """Apply ``s`` to a term, an atom, or a tuple/list/set of those."""
    if isinstance(x, Atom):
        return s.atom(x)
    if isinstance(x, (Var, Const, Frozen)):
        return s.term(x)
    if isinstance(x, tuple):
        return tuple(apply(s, e) for e in x)
    if isinstance(x, list):
        return [apply(s, e) for e in x]
    if isinstance(x, (set, frozenset)):
        return type(x)(apply(s, e) for e in x)
    raise TypeError(f"cannot apply a substitution to {type(x).__name__}")


def compose(outer: Substitution, inner: Substitution) -> Substitution:
    """The substitution that applies ``inner`` and then ``outer``.

    Inner bindings win on their own domain.  The result is not re-normalized:
    when ``outer`` produces a variable that ``inner`` binds, resolving chains
    would change what a single application does.
    """
    out: dict[Var, Term] = {v: outer.term(t) for v, t in inner.items()}
    for v, t in outer.items():
        if v not in inner:
            out[v] = t
    return Substitution._trusted({v: t for v, t in out.items() if v != t})


def freeze(atoms: Iterable[Atom]) -> frozenset[Atom]:
    return frozenset(freeze_atom(a) for a in atoms)


def freeze_term(t: Term) -> Term:
    return Frozen(t.name) if isinstance(t, Var) else t


def freeze_atom(a: Atom) -> Atom:
    return Atom(a.relation, (freeze_term(t) for t in a.args))


def unfreeze_term(t: Term) -> Term:
    return Var(t.name) if isinstance(t, Frozen) else t


def unfreeze(d: Iterable[Atom]) -> list[Atom]:
    out = {Atom(a.relation, (unfreeze_term(t) for t in a.args)) for a in d}
    return sorted(out, key=Atom.sort_key)


DatabaseInstance = frozenset  # of ground Atom


def make_instance(facts: Iterable[Atom]) -> frozenset[Atom]:
    facts = frozenset(facts)
    for f in facts:
        if not f.is_ground():
            raise ValueError(f"database facts must be ground: {f}")
    return facts


class UnionFind:
    """Equivalence classes of variables, each with at most one ground term.

    ``copy`` is cheap enough for backtracking searches over small queries.
    """

    __slots__ = ("parent", "value")

    def __init__(self):
        self.parent: dict[Var, Var] = {}
        self.value: dict[Var, Term] = {}

    def copy(self) -> "UnionFind":
        uf = UnionFind.__new__(UnionFind)
        uf.parent = dict(self.parent)
        uf.value = dict(self.value)
        return uf

    def find(self, v: Var) -> Var:
        parent = self.parent
        root = v
        while root in parent:
            root = parent[root]
        while v != root:
            nxt = parent[v]
            parent[v] = root
            v = nxt
        return root

    def union_terms(self, a: Term, b: Term) -> bool:
        if isinstance(a, Var):
            if isinstance(b, Var):
                ra, rb = self.find(a), self.find(b)
                if ra == rb:
                    return True
                va, vb = self.value.get(ra), self.value.get(rb)
                if va is not None and vb is not None and va != vb:
                    return False
                # keep the lexicographically least variable as root
                if rb.name < ra.name:
                    ra, rb = rb, ra
                self.parent[rb] = ra
                val = va if va is not None else vb
                self.value.pop(rb, None)
                if val is not None:
                    self.value[ra] = val
                return True
            return self._bind(a, b)
        if isinstance(b, Var):
            return self._bind(b, a)
        return a == b

    def _bind(self, v: Var, g: Term) -> bool:
        r = self.find(v)
        cur = self.value.get(r)
        if cur is None:
            self.value[r] = g
            return True
        return cur == g

    def unify_atoms(self, a: Atom, b: Atom) -> bool:
        if a.relation != b.relation or len(a.args) != len(b.args):
            return False
        for x, y in zip(a.args, b.args):
            if not self.union_terms(x, y):
                return False
        return True

    def resolve(self, v: Var) -> Term:
        r = self.find(v)
        return self.value.get(r, r)

    def substitution(self, variables: Iterable[Var] | None = None) -> Substitution:
        keys = set(self.parent) | set(self.value) if variables is None else variables
        out = {}
        for v in keys:
            t = self.resolve(v)
            if t != v:
                out[v] = t
        return Substitution._trusted(out)


def mgu(equations: Iterable[tuple[Atom, Atom]]) -> Substitution | None:
    """Most general unifier of pairs of flat atoms, or None when none exists.

    Each class binds to its constant if it has one, otherwise to its
    lexicographically least variable.
    """
    uf = UnionFind()
    seen: set[Var] = set()
    for lhs, rhs in equations:
        seen.update(lhs.variables())
        seen.update(rhs.variables())
        if not uf.unify_atoms(lhs, rhs):
            return None
    return uf.substitution(seen)
