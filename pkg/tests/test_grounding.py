from __future__ import annotations

import pytest

from uatmsim.reasoner import (
    CapacityError,
    ground,
    ground_atom,
    parse_program,
)

from conftest import base_plus


def atoms_of(g, pred):
    return sorted(a for a in g.atoms if a.pred == pred)


def test_interval_fact_expansion():
    g = ground(parse_program("step(1..3)."))
    assert set(g.facts) == {ground_atom("step", 1), ground_atom("step", 2), ground_atom("step", 3)}


def test_coverage_rule_expansion_matches_guards():
    g = ground(
        parse_program(
            "edge_range(1, 2, 1..20).\n"
            "covered_wp(1, 2, 1, P) :- 1 <= P, P < 16, edge_range(1, 2, P).\n"
        )
    )
    produced = atoms_of(g, "covered_wp")
    assert len(produced) == 15
    assert produced[0].args == (1, 2, 1, 1)
    assert produced[-1].args == (1, 2, 1, 15)


def test_empty_join_produces_no_instances():
    g = ground(parse_program("p(X) :- q(X), r(X).\nq(1)."))
    assert atoms_of(g, "p") == []
    assert all(r.head is None or r.head.pred != "p" for r in g.rules)


def test_arithmetic_inversion_binds_through_test_literal():
    # step(T+1) can bind T even when matched first
    g = ground(parse_program("step(1..3).\nnext(T) :- step(T+1), step(T)."))
    assert [a.args for a in atoms_of(g, "next")] == [(1,), (2,)]


def test_comparisons_are_eliminated_from_instances():
    g = ground(parse_program("q(1..5).\np(X) :- q(X), 2 <= X, X < 4."))
    instances = [r for r in g.rules if r.head is not None and r.head.pred == "p"]
    assert sorted(r.head.args[0] for r in instances) == [2, 3]
    for r in instances:
        assert all(not isinstance(e, tuple) or e.pred == "q" for e in r.body)


def test_negation_against_facts_prunes_instances():
    g = ground(parse_program("q(1). q(2). r(1).\np(X) :- q(X), not r(X)."))
    instances = [r for r in g.rules if r.head and r.head.pred == "p"]
    # the X=1 instance contradicts the fact r(1) and is dropped outright
    assert [r.head.args for r in instances] == [(2,)]


def test_negation_of_underivable_atom_is_kept_but_harmless():
    g = ground(parse_program("q(1).\np(X) :- q(X), not r(X)."))
    (instance,) = [r for r in g.rules if r.head and r.head.pred == "p"]
    assert any(str(e) == "not r(1)" for e in instance.body)


def test_head_interval_expands():
    g = ground(parse_program("flag(1..3) :- seed.\nseed."))
    assert [a.args for a in atoms_of(g, "flag")] == [(1,), (2,), (3,)]


def test_capacity_error_names_the_offender():
    with pytest.raises(CapacityError) as err:
        ground(parse_program("big(1..100)."), capacity=10)
    assert "big(1..100)" in str(err.value)
    with pytest.raises(CapacityError) as err:
        ground(parse_program("n(1..40).\npair(X, Y) :- n(X), n(Y)."), capacity=200)
    assert "pair(X, Y)" in str(err.value)


def test_existential_grounding_of_unused_guard_variable():
    # several instances share one head when a body variable stays out of it
    g = ground(
        parse_program(
            "edge_range(2, 3, 1..13).\nok(A) :- agent(A), edge_range(2, 3, P).\nagent(7).\n"
        )
    )
    assert [a.args for a in atoms_of(g, "ok")] == [(7,)]
    instances = [r for r in g.rules if r.head and r.head.pred == "ok"]
    assert len(instances) == 13


def test_fig1_detour_grounds_compactly():
    g = ground(base_plus("detour_all.lp"))
    assert g.atom_count < 5000
    assert ground_atom("covered_wp", 1, 2, 1, 15) in g.atoms_set()
    assert ground_atom("covered_wp", 1, 2, 1, 16) not in g.atoms_set()
