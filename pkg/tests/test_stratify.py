from __future__ import annotations

import pytest

from uatmsim.reasoner import (
    StratificationError,
    ground,
    ground_atom,
    parse_program,
    stratify,
)

from conftest import base_plus


def test_facts_only_is_single_stratum():
    strat = stratify(ground(parse_program("p(1). q(2). r(1..3).")))
    assert len(strat.strata) == 1
    assert strat.stratum_of(ground_atom("p", 1)) == 0


def test_coverage_chain_orders_strictly():
    strat = stratify(ground(base_plus("query_covered.lp")))
    covered_agent = strat.stratum_of(ground_atom("covered_agent", 1, 1))
    covered_by = strat.stratum_of(ground_atom("covered_by_uatm1", 1))
    loc = strat.stratum_of(ground_atom("loc", 1, 1, 1, 2, 3))
    assert loc < covered_agent < covered_by


def test_negated_dependencies_are_strictly_earlier():
    g = ground(base_plus("detour_all.lp"))
    strat = stratify(g)
    for rule in g.rules:
        if rule.head is None:
            continue
        head = strat.stratum_of(rule.head)
        for atom in rule.positive():
            assert strat.stratum_of(atom) <= head
        for neg in rule.negated():
            if neg.atom in g.atoms_set():
                assert strat.stratum_of(neg.atom) < head
        for pattern in rule.patterns():
            for atom in g.atoms:
                if pattern.matches(atom):
                    assert strat.stratum_of(atom) < head


def test_time_layering_splits_plan_and_detour_request():
    # the predicate-level cycle plan <-> detour_request disappears on the
    # ground program: step-2 plans sit strictly above step-2 requests
    strat = stratify(ground(base_plus("detour_all.lp")))
    plan_step2 = strat.stratum_of(ground_atom("plan", 1, 2, 1, 2))
    request_step2 = strat.stratum_of(ground_atom("detour_request", 1, 2))
    assert request_step2 < plan_step2


def test_positive_recursion_shares_a_stratum():
    strat = stratify(
        ground(
            parse_program(
                "link(1, 2). link(2, 3). link(3, 1).\n"
                "reach(X) :- link(1, X).\n"
                "reach(Y) :- reach(X), link(X, Y).\n"
            )
        )
    )
    layers = {strat.stratum_of(ground_atom("reach", v)) for v in (1, 2, 3)}
    assert len(layers) == 1


def test_negative_cycle_is_rejected_with_a_cycle():
    g = ground(parse_program("p(1) :- not q(1). q(1) :- not p(1)."))
    with pytest.raises(StratificationError) as err:
        stratify(g)
    cycle = [str(a) for a in err.value.cycle]
    assert cycle[0] == cycle[-1]
    assert {"p(1)", "q(1)"} <= set(cycle)


def test_negative_self_loop_rejected():
    g = ground(parse_program("w :- not w."))
    with pytest.raises(StratificationError):
        stratify(g)
