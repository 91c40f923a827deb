"""Discrete waypoint-level movement over the corridor network.

Each step every in-flight agent advances ``speed`` waypoints along its
current corridor; overflow spills into the next edge of the plan in force at
the new step, and running off the last edge lands the agent at its target.
Plans carry forward step to step unless a detour order replaced them (the
gateway writes replacement routes into the plan ledger at the activation
step).

``advance_step`` is a pure function from state to state: identical inputs
produce identical states and event order, which is what makes exported
traces byte-stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from .world import (
    AgentState,
    Edge,
    InvariantError,
    ScenarioDoc,
    load_scenario,
    scenario_to_dict,
)


class SimError(Exception):
    """Stepping past the horizon or an internally inconsistent state."""


EVENT_KIND_RANK = {
    "moved": 0,
    "transitioned": 1,
    "arrived": 2,
    "congestion_alert": 3,
    "detour_applied": 4,
}

DEFAULT_CONGESTION_THRESHOLD = 0.8


@dataclass(frozen=True)
class SimEvent:
    step: int
    kind: str
    payload: dict

    def sort_key(self) -> tuple:
        who = self.payload.get("agent", self.payload.get("corridor", 0))
        if isinstance(who, list):
            who = tuple(who)
        return (EVENT_KIND_RANK[self.kind], who)

    def to_json_line(self) -> str:
        doc = {"step": self.step, "kind": self.kind}
        doc.update(self.payload)
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class SimState:
    """One snapshot of the rolling simulation; treat as immutable."""

    scenario: ScenarioDoc
    step: int
    agent_states: tuple[AgentState, ...]
    plans: dict  # (agent, step) -> tuple[Edge, ...], sparse ledger
    arrived: frozenset[int]
    events: tuple[SimEvent, ...]

    def in_flight(self) -> tuple[int, ...]:
        return tuple(s.agent for s in self.agent_states)

    def state_of(self, agent: int) -> AgentState | None:
        for s in self.agent_states:
            if s.agent == agent:
                return s
        return None

    def plan_of(self, agent: int, step: int | None = None) -> tuple[Edge, ...]:
        return plan_in_force(self.plans, agent, self.step if step is None else step)


def plan_in_force(plans: dict, agent: int, step: int) -> tuple[Edge, ...]:
    """Latest plan set at or before ``step`` (the frame rule, read-side)."""
    for t in range(step, 0, -1):
        edges = plans.get((agent, t))
        if edges is not None:
            return edges
    return ()


def initial_state(scenario: ScenarioDoc) -> SimState:
    states = tuple(
        spec.state for spec in sorted(scenario.agents, key=lambda a: a.agent)
        if spec.state is not None
    )
    plans = {
        (spec.agent, 1): spec.plan.edges
        for spec in scenario.agents
        if spec.plan is not None
    }
    return SimState(
        scenario=scenario,
        step=1,
        agent_states=states,
        plans=plans,
        arrived=frozenset(),
        events=(),
    )


def _next_edge(plan: tuple[Edge, ...], edge: Edge) -> Edge | None:
    idx = plan.index(edge)
    return plan[idx + 1] if idx + 1 < len(plan) else None


def advance_step(state: SimState, speed: int = 1) -> SimState:
    """Move every in-flight agent ``speed`` waypoints; returns the new state."""
    world = state.scenario.world
    if state.step + 1 > world.horizon:
        raise SimError(f"cannot step past horizon {world.horizon}")
    if speed < 1:
        raise SimError("speed must be at least 1 waypoint per step")
    new_step = state.step + 1
    plans = dict(state.plans)
    arrived = set(state.arrived)
    new_states: list[AgentState] = []
    events: list[SimEvent] = []

    for ast in sorted(state.agent_states, key=lambda s: s.agent):
        plan = plan_in_force(plans, ast.agent, new_step)
        plans[(ast.agent, new_step)] = plan
        edge = ast.corridor
        if edge not in plan:
            raise SimError(
                f"agent {ast.agent} occupies {edge} which is not in its plan {plan}"
            )
        waypoint = ast.waypoint + speed
        landed = False
        while waypoint > world.waypoint_count(edge):
            waypoint -= world.waypoint_count(edge)
            following = _next_edge(plan, edge)
            if following is None:
                arrived.add(ast.agent)
                events.append(
                    SimEvent(new_step, "arrived", {"agent": ast.agent, "vertiport": edge[1]})
                )
                landed = True
                break
            edge = following
        if landed:
            continue
        if edge != ast.corridor:
            events.append(
                SimEvent(
                    new_step,
                    "transitioned",
                    {
                        "agent": ast.agent,
                        "from": list(ast.corridor),
                        "to": list(edge),
                        "waypoint": waypoint,
                    },
                )
            )
        else:
            events.append(
                SimEvent(
                    new_step,
                    "moved",
                    {"agent": ast.agent, "corridor": list(edge), "waypoint": waypoint},
                )
            )
        new_states.append(AgentState(ast.agent, new_step, edge, waypoint))

    events.sort(key=SimEvent.sort_key)
    return SimState(
        scenario=state.scenario,
        step=new_step,
        agent_states=tuple(new_states),
        plans=plans,
        arrived=frozenset(arrived),
        events=state.events + tuple(events),
    )


def occupancy(state: SimState, corridor: Edge) -> tuple[int, float]:
    """Agents on the directed corridor and the fraction of its waypoints."""
    world = state.scenario.world
    if not world.knows(corridor):
        raise InvariantError(f"corridor {corridor}", "not declared in either direction")
    count = sum(1 for s in state.agent_states if s.corridor == corridor)
    return count, count / world.waypoint_count(corridor)


def detect_congestion(state: SimState, threshold: float) -> list[SimEvent]:
    """One alert per corridor at or above the occupancy threshold."""
    if not (0 < threshold <= 1):
        raise ValueError("threshold must be in (0, 1]")
    world = state.scenario.world
    oriented = {c.edge for c in world.corridors}
    oriented |= {s.corridor for s in state.agent_states}
    alerts: list[SimEvent] = []
    for edge in sorted(oriented):
        count, fraction = occupancy(state, edge)
        if fraction >= threshold:
            alerts.append(
                SimEvent(
                    state.step,
                    "congestion_alert",
                    {
                        "corridor": list(edge),
                        "count": count,
                        "fraction": round(fraction, 6),
                        "suggestion": "consider closing this corridor and issuing "
                        "an alternative route via close_corridor",
                    },
                )
            )
    return alerts


def snapshot_scenario(state: SimState) -> ScenarioDoc:
    """Re-base the current state to a step-1 scenario document.

    Current locations and plans-in-force become the step-1 picture and the
    horizon shrinks to the remaining steps, so detour reasoning over a live
    simulation reuses the plain scenario pipeline unchanged.
    """
    doc = scenario_to_dict(state.scenario)
    doc["horizon"] = state.scenario.world.horizon - state.step + 1
    agents = []
    for spec in sorted(state.scenario.agents, key=lambda a: a.agent):
        entry: dict = {"id": spec.agent}
        current = state.state_of(spec.agent)
        if current is not None:
            entry["corridor"] = {"from": current.corridor[0], "to": current.corridor[1]}
            entry["waypoint"] = current.waypoint
            entry["plan"] = [list(e) for e in state.plan_of(spec.agent)]
        agents.append(entry)
    doc["agents"] = agents
    meta = dict(doc.get("metadata", {}))
    meta["snapshot_at_step"] = state.step
    doc["metadata"] = meta
    return load_scenario(doc)


def apply_route(
    state: SimState, agent: int, route: tuple[Edge, ...], at_step: int
) -> SimState:
    """Write a replacement route into the plan ledger (detour delivery)."""
    plans = dict(state.plans)
    plans[(agent, at_step)] = tuple(route)
    event = SimEvent(
        state.step,
        "detour_applied",
        {"agent": agent, "at_step": at_step, "route": [list(e) for e in route]},
    )
    return replace(state, plans=plans, events=state.events + (event,))
