import random
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqcomplete import (
    ArityMismatch,
    Atom,
    Const,
    IncompleteDatabase,
    TCSet,
    TCStatement,
    UnsafeQuery,
    apply_tc,
    apply_tcset,
    canonical_db,
    dependency_graph,
    is_acyclic,
    is_complete,
    minimize,
    satisfies,
    tc_query,
)
from cqcomplete.oracle import EnumerationBounds, oracle_entails_complete
from cqcomplete.syntax import parse, parse_query, parse_statements
from generators import random_query, random_schema, random_tcset

seeds = st.integers(0, 2**32).map(random.Random)


def facts(text):
    return parse(text).facts


@pytest.fixture(scope="module")
def stmts(school):
    c_sp, c_pb, c_enp = school.statements
    return c_sp, c_pb, c_enp


D = "school(goethe,primary,merano). pupil(john,1,goethe)."


def test_tc_query(stmts):
    c_sp, c_pb, _ = stmts
    assert tc_query(c_sp) == parse_query("q(S,primary,D) :- school(S,primary,D).")
    assert tc_query(c_pb) == parse_query("q(N,C,S) :- pupil(N,C,S), school(S,T,merano).")
    bare = TCStatement(Atom("r", (Const("a"),)))
    assert tc_query(bare).body == (bare.head,)


def test_apply_tc_examples(stmts):
    c_sp, c_pb, c_enp = stmts
    d = facts(D)
    assert apply_tc(c_sp, d) == facts("school(goethe,primary,merano).")
    assert apply_tc(c_pb, d) == facts("pupil(john,1,goethe).")
    assert apply_tc(c_enp, frozenset()) == frozenset()
    assert apply_tcset([c_sp, c_pb], d) == d
    assert apply_tcset(TCSet(), d) == frozenset()


def test_apply_tcset_monotone_on_running_example(school):
    small = facts("school(goethe,primary,merano).")
    big = facts(D + " learns(john,english).")
    assert apply_tcset(school.statements, small) <= apply_tcset(school.statements, big)


def test_satisfies_examples(stmts, conn):
    c_sp, c_pb, _ = stmts
    avail = facts("school(goethe,primary,merano).")
    idb = IncompleteDatabase(avail | facts("pupil(john,1,goethe)."), avail)
    assert satisfies(idb, c_sp)
    assert not satisfies(idb, c_pb)
    assert not satisfies(idb, [c_sp, c_pb])
    full = facts(D)
    assert satisfies(IncompleteDatabase(full, full), stmts)
    ideal = facts("conn(a,b). conn(b,c). conn(d,e).")
    idb = IncompleteDatabase(ideal, facts("conn(a,b). conn(b,c)."))
    assert satisfies(idb, conn.statements)


def test_incomplete_database_requires_subset():
    with pytest.raises(ValueError):
        IncompleteDatabase(frozenset(), facts("r(a)."))


def test_running_example_verdicts(school):
    cs = school.statements
    assert is_complete(school.query("q_ppb"), list(cs)[:2])
    assert not is_complete(school.query("q_pbl"), cs)
    assert is_complete(school.query("q_pbl_spec"), cs)


def test_non_minimal_caveat():
    cs = parse_statements("complete r(X,a).")
    q = parse_query("q(X) :- r(X,a), r(X,Y).")
    assert is_complete(q, cs)
    assert not is_complete(parse_query("q(X) :- r(X,a), r(X,c)."), cs)


def test_is_complete_rejects_unsafe():
    from cqcomplete import ConjunctiveQuery, Var

    with pytest.raises(UnsafeQuery):
        is_complete(ConjunctiveQuery("q", (Var("X"),), (), generalized=True), TCSet())


def test_dependency_graph(school, conn):
    assert dependency_graph(school.statements) == {
        "learns": {"pupil", "school"},
        "pupil": {"school"},
        "school": set(),
    }
    assert is_acyclic(school.statements)
    assert dependency_graph(conn.statements) == {"conn": {"conn"}}
    assert not is_acyclic(conn.statements)
    assert dependency_graph(TCSet()) == {} and is_acyclic(TCSet())


def test_tcset_checks():
    r1 = Atom("r", (Const("a"),))
    r2 = Atom("r", (Const("a"), Const("b")))
    with pytest.raises(ArityMismatch):
        TCSet([TCStatement(r1), TCStatement(r2)])
    with pytest.raises(ValueError):
        TCSet([TCStatement(r1, label="c"), TCStatement(r1, label="c")])


# -- operator laws ------------------------------------------------------------------

SCHEMA = [("p", 1), ("r", 2)]
POOL = [Const(x) for x in "abc"]
ALL_FACTS = [Atom("p", (x,)) for x in POOL] + [Atom("r", t) for t in product(POOL, repeat=2)]


def _instance(rnd, p=0.4):
    return frozenset(f for f in ALL_FACTS if rnd.random() < p)


def _cs(rnd):
    return random_tcset(rnd, SCHEMA, POOL[:1])


@settings(max_examples=200)
@given(seeds)
def test_tc_contracts(rnd):
    cs, d = _cs(rnd), _instance(rnd)
    assert apply_tcset(cs, d) <= d


@settings(max_examples=200)
@given(seeds)
def test_tc_monotone(rnd):
    cs, d = _cs(rnd), _instance(rnd)
    bigger = d | _instance(rnd)
    assert apply_tcset(cs, d) <= apply_tcset(cs, bigger)


@settings(max_examples=200)
@given(seeds)
def test_tc_gives_smallest_available(rnd):
    cs, d = _cs(rnd), _instance(rnd)
    least = apply_tcset(cs, d)
    assert satisfies(IncompleteDatabase(d, least), cs)
    for _ in range(5):
        avail = frozenset(f for f in d if rnd.random() < 0.7)
        if satisfies(IncompleteDatabase(d, avail), cs):
            assert least <= avail


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_is_complete_matches_oracle(rnd):
    schema = random_schema(rnd, 3, 2)
    consts = POOL[: rnd.randint(0, 1)]
    cs = random_tcset(rnd, schema, consts)
    q = random_query(rnd, schema, consts, max_body=3, max_vars=3)
    verdict = oracle_entails_complete(q, cs, EnumerationBounds.for_inputs([q], cs))
    assert is_complete(q, cs) == verdict.holds


@settings(max_examples=100)
@given(seeds)
def test_minimal_shortcut_agrees(rnd):
    cs = _cs(rnd)
    q = minimize(random_query(rnd, SCHEMA, POOL[:1], max_body=3, max_vars=3))
    shortcut = canonical_db(q) <= apply_tcset(cs, canonical_db(q))
    assert is_complete(q, cs) == shortcut
