from __future__ import annotations

import random

import pytest

from uatmsim.reasoner import parse_program, query, solve_program
from uatmsim.world import (
    FlightPlan,
    InvariantError,
    PlanError,
    SchemaError,
    load_scenario,
    order_edges,
    scenario_to_dict,
    source_of,
    target_of,
    to_facts,
)

from scenario_gen import random_scenario, random_scenario_doc


def test_fig1_shape(fig1):
    assert fig1.world.vertiports == frozenset(range(1, 8))
    assert len(fig1.world.corridors) == 4
    assert fig1.world.uatms == frozenset((1, 2, 3))
    assert len(fig1.located_agents()) == 6
    assert len(fig1.agents) == 20
    assert fig1.world.horizon == 3


def test_fig1_fact_base_reconstructs_shared_facts(fig1):
    facts = to_facts(fig1)
    by_pred = {}
    for a in facts:
        by_pred.setdefault(a.pred, set()).add(a.args)
    assert by_pred["agent"] == {(i,) for i in range(1, 21)}
    assert by_pred["uatm"] == {(1,), (2,), (3,)}
    assert by_pred["vp"] == {(i,) for i in range(1, 8)}
    assert by_pred["edge"] == {(1, 2), (2, 3), (2, 7), (7, 3)}
    assert by_pred["cover"] == {(1, 1), (1, 3), (2, 2), (3, 7)}
    assert by_pred["step"] == {(1,), (2,), (3,)}
    assert by_pred["loc"] == {
        (1, 1, 1, 2, 3),
        (2, 1, 1, 2, 7),
        (3, 1, 1, 2, 17),
        (4, 1, 1, 2, 12),
        (5, 1, 1, 2, 15),
        (6, 1, 1, 2, 19),
    }
    assert len(by_pred["covered_wp"]) == 52  # 15+14+5+8+7+3
    assert {(u, v) for (a, t, u, v) in by_pred["plan"]} == {(1, 2), (2, 3)}
    # edge ranges expand one fact per waypoint, including the (7,3) extension
    assert sum(1 for args in by_pred["edge_range"] if args[:2] == (1, 2)) == 20
    assert sum(1 for args in by_pred["edge_range"] if args[:2] == (7, 3)) == 18


def test_coverage_consistency(fig1):
    facts = to_facts(fig1)
    emitted = {a.args for a in facts if a.pred == "covered_wp"}
    world = fig1.world
    for corridor in world.corridors:
        for wp in range(1, corridor.waypoints + 1):
            for uatm in sorted(world.uatms):
                expected = any(
                    s.edge == corridor.edge and s.uatm == uatm and s.contains(wp)
                    for s in world.coverage
                )
                assert ((corridor.from_vp, corridor.to_vp, uatm, wp) in emitted) == expected


def test_fact_round_trip_through_reasoner(fig1):
    facts = to_facts(fig1)
    program = parse_program("\n".join(f"{a}." for a in sorted(facts)))
    model = solve_program(program)
    for pred, arity in (("loc", 5), ("edge", 2), ("cover", 2), ("plan", 4)):
        assert query(model, pred, arity) == tuple(
            sorted(a.args for a in facts if a.pred == pred and len(a.args) == arity)
        )


def test_empty_scenario_is_valid():
    doc = {
        "vertiports": [1, 2],
        "uatms": [1],
        "horizon": 1,
        "corridors": [{"from": 1, "to": 2, "waypoints": 5}],
        "vertiport_cover": [],
        "coverage": [],
        "agents": [],
    }
    scenario = load_scenario(doc)
    assert scenario.located_agents() == ()
    facts = to_facts(scenario)
    assert {a.pred for a in facts} == {"uatm", "vp", "edge", "edge_range", "step"}


def test_waypoint_out_of_range_is_invariant_error(fig1):
    doc = scenario_to_dict(fig1)
    doc["agents"][0]["corridor"] = {"from": 2, "to": 3}
    doc["agents"][0]["waypoint"] = 25
    doc["agents"][0]["plan"] = [[2, 3]]
    with pytest.raises(InvariantError) as err:
        load_scenario(doc)
    assert "1..13" in str(err.value)


def test_schema_error_paths():
    with pytest.raises(SchemaError) as err:
        load_scenario({"vertiports": [1], "uatms": "x"})
    assert "$.uatms" in str(err.value)
    with pytest.raises(SchemaError) as err:
        load_scenario("{ not json")
    assert "$" in str(err.value)
    with pytest.raises(SchemaError) as err:
        load_scenario({"vertiports": [1], "nonsense": 1})
    assert "nonsense" in str(err.value)


def test_located_agent_needs_plan_containing_corridor(fig1):
    doc = scenario_to_dict(fig1)
    doc["agents"][0]["plan"] = [[2, 3]]
    with pytest.raises(InvariantError) as err:
        load_scenario(doc)
    assert "occupied corridor" in str(err.value)


def test_duplicate_corridor_rejected(fig1):
    doc = scenario_to_dict(fig1)
    doc["corridors"].append({"from": 2, "to": 1, "waypoints": 9})
    with pytest.raises(InvariantError):
        load_scenario(doc)


def test_source_and_target():
    plan = FlightPlan(9, 1, ((1, 2), (2, 3)))
    assert source_of(plan) == 1
    assert target_of(plan) == 3
    assert source_of(FlightPlan(9, 1, ((1, 2),))) == 1
    assert target_of(FlightPlan(9, 1, ((1, 2), (2, 7), (7, 3)))) == 3
    with pytest.raises(PlanError):
        source_of(FlightPlan(9, 1, ()))
    with pytest.raises(PlanError):
        target_of(FlightPlan(9, 1, ((1, 2), (3, 4))))


def test_source_target_agree_with_reasoner_on_random_scenarios():
    rng = random.Random(7)
    rules = (
        "source(A, U) :- agent(A), plan(A, 1, U, V), not plan(A, 1, _, U).\n"
        "target(A, V) :- agent(A), plan(A, 1, U, V), not plan(A, 1, V, _).\n"
    )
    for _ in range(30):
        scenario = random_scenario(rng)
        facts = "\n".join(f"{a}." for a in sorted(to_facts(scenario)))
        model = solve_program(parse_program(facts + "\n" + rules))
        sources = dict(query(model, "source", 2))
        targets = dict(query(model, "target", 2))
        for spec in scenario.agents:
            if spec.plan is None:
                continue
            assert sources[spec.agent] == source_of(spec.plan)
            assert targets[spec.agent] == target_of(spec.plan)


def test_scenario_dict_round_trip():
    rng = random.Random(99)
    for _ in range(10):
        doc = random_scenario_doc(rng)
        scenario = load_scenario(doc)
        again = load_scenario(scenario_to_dict(scenario))
        assert scenario == again


def test_order_edges_rejects_non_paths():
    assert order_edges({(2, 7), (1, 2), (7, 3)}) == ((1, 2), (2, 7), (7, 3))
    with pytest.raises(PlanError):
        order_edges({(1, 2), (3, 4)})
    with pytest.raises(PlanError):
        order_edges(set())
