"""Random scenario generators shared by the property and acceptance suites."""

from __future__ import annotations

import random
from dataclasses import dataclass

from cqcomplete import Atom, ConjunctiveQuery, Const, TCSet, TCStatement, Var


@dataclass
class Scenario:
    schema: list[tuple[str, int]]
    constants: list[Const]
    cs: TCSet
    queries: list[ConjunctiveQuery]


def random_schema(rng: random.Random, max_rels=3, max_arity=3) -> list[tuple[str, int]]:
    n = rng.randint(1, max_rels)
    return [(f"r{i}", rng.randint(1, max_arity)) for i in range(n)]


def random_atoms(rng, schema, count, variables, constants, p_const=0.2) -> list[Atom]:
    out = []
    for _ in range(count):
        rel, ar = rng.choice(schema)
        args = [rng.choice(constants) if constants and rng.random() < p_const else rng.choice(variables) for _ in range(ar)]
        out.append(Atom(rel, args))
    return out


def random_query(rng, schema, constants, max_body=4, max_vars=4, head_arity=None, name="q") -> ConjunctiveQuery:
    nvars = rng.randint(1, max_vars)
    variables = [Var(v) for v in "XYZWUV"[:nvars]]
    body = random_atoms(rng, schema, rng.randint(1, max_body), variables, constants)
    used = [v for v in variables if any(v in a.args for a in body)]
    if head_arity is None:
        head_arity = rng.randint(0, min(2, len(used)))
    head = [rng.choice(used) for _ in range(head_arity)] if used else []
    return ConjunctiveQuery(name, head, body)


def random_statement(rng, schema, constants, max_cond=2, p_const=0.2) -> TCStatement:
    variables = [Var(v) for v in "ABCD"]
    rel, ar = rng.choice(schema)
    head = Atom(rel, [rng.choice(constants) if constants and rng.random() < p_const else rng.choice(variables) for _ in range(ar)])
    cond = random_atoms(rng, schema, rng.randint(0, max_cond), variables, constants, p_const)
    return TCStatement(head, cond)


def random_tcset(rng, schema, constants, max_statements=3, max_cond=2) -> TCSet:
    return TCSet(random_statement(rng, schema, constants, max_cond) for _ in range(rng.randint(0, max_statements)))


def random_scenario(rng: random.Random, max_rels=3, max_arity=3, max_constants=2, max_body=4) -> Scenario:
    """Queries whose variables plus constants never exceed four terms."""
    schema = random_schema(rng, max_rels, max_arity)
    constants = [Const(c) for c in "abcd"[: rng.randint(0, max_constants)]]
    max_vars = max(1, 4 - len(constants))
    cs = random_tcset(rng, schema, constants)
    arity = rng.randint(0, 1)
    queries = [random_query(rng, schema, constants, max_body, max_vars, arity, name=f"q{i}") for i in range(2)]
    return Scenario(schema, constants, cs, queries)


def random_acyclic_tcset(rng, schema, constants, max_statements=3, max_cond=2) -> TCSet:
    """Statements whose conditions only mention later relations in schema order."""
    stmts = []
    variables = [Var(v) for v in "ABC"]
    for _ in range(rng.randint(1, max_statements)):
        i = rng.randrange(len(schema))
        rel, ar = schema[i]
        later = schema[i + 1 :]
        head = Atom(rel, [rng.choice(constants) if constants and rng.random() < 0.2 else rng.choice(variables) for _ in range(ar)])
        cond = random_atoms(rng, later, rng.randint(0, max_cond), variables, constants) if later else []
        stmts.append(TCStatement(head, cond))
    return TCSet(stmts)
