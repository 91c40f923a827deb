"""Corridor-closure reasoning.

Everything here is a thin, typed layer over the reasoner: each operation
assembles a rule program from the scenario's fact base, evaluates it, and
extracts the answer.  The generated detour program follows the published
query shape: coverage decides which agents the issuing unit reaches
directly, a relay rule picks up the rest, detour requests are derived one
step before activation, and route adoption is enforced by an integrity
constraint, so a botched delivery plan shows up as an unsatisfiable model
listing the violated constraints per agent rather than as a silent no-op.

``change_route(A, T)`` here requires the agent's step-T plan to contain
*every* edge of the alternative route; a detour counts as applied only when
the whole route was adopted.
"""

from __future__ import annotations

from dataclasses import dataclass

from .reasoner import Model, Program, merge_programs, parse_program, query, solve_program
from .world import (
    Edge,
    InvariantError,
    PlanError,
    ScenarioDoc,
    check_path,
    order_edges,
    to_facts,
)


class DetourError(Exception):
    """Invalid detour order or misuse of an outcome."""


@dataclass(frozen=True)
class DetourOrder:
    """A manager's corridor closure with its replacement route."""

    closed: Edge
    alt_route: tuple[Edge, ...]
    activation_step: int
    requesting_vertiport: int
    issuing_uatm: int


@dataclass(frozen=True)
class DetourOutcome:
    """What the reasoner derived for one order."""

    order: DetourOrder
    requests: frozenset[tuple[int, int]]  # (agent, step)
    changes: frozenset[tuple[int, int]]
    covered: frozenset[int]
    uncovered: frozenset[int]
    status: str
    violated: tuple[str, ...]
    plan_atoms: frozenset[tuple[int, int, int, int]]  # (agent, step, from, to)

    @property
    def satisfiable(self) -> bool:
        return self.status == "satisfiable"

    def affected_agents(self) -> tuple[int, ...]:
        return tuple(sorted({a for a, _ in self.requests}))


def validate_order(scenario: ScenarioDoc, order: DetourOrder) -> None:
    world = scenario.world
    if not world.knows(order.closed):
        raise DetourError(f"closed corridor {order.closed} is not declared")
    if not order.alt_route:
        raise DetourError("alternative route is empty")
    for edge in order.alt_route:
        if not world.knows(edge):
            raise DetourError(f"route edge {edge} is not declared")
        if edge == order.closed or edge == (order.closed[1], order.closed[0]):
            raise DetourError(f"alternative route uses the closed corridor {order.closed}")
    try:
        check_path(order.alt_route, "alternative route")
    except PlanError as exc:
        raise DetourError(str(exc)) from exc
    if order.activation_step < 2:
        raise DetourError("activation step must be at least 2 (requests lead by one step)")
    if order.activation_step > world.horizon:
        raise DetourError(
            f"activation step {order.activation_step} is beyond horizon {world.horizon}"
        )
    if order.alt_route[-1][1] != order.requesting_vertiport:
        raise DetourError(
            f"alternative route ends at {order.alt_route[-1][1]}, "
            f"not at the requesting vertiport {order.requesting_vertiport}"
        )
    if order.issuing_uatm not in world.uatms:
        raise DetourError(f"uatm {order.issuing_uatm} is not declared")


def _facts_program(scenario: ScenarioDoc) -> Program:
    lines = [f"{atom}." for atom in sorted(to_facts(scenario))]
    return parse_program("\n".join(lines) + "\n")


_COVERED_AGENT_RULE = (
    "covered_agent(A, TM) :- loc(A, T, U, V, WP), covered_wp(U, V, TM, WP).\n"
)

_SOURCE_TARGET_RULES = (
    "source(A, U) :- agent(A), plan(A, 1, U, V), not plan(A, 1, _, U).\n"
    "target(A, V) :- agent(A), plan(A, 1, U, V), not plan(A, 1, V, _).\n"
)


def covered_agents(scenario: ScenarioDoc, uatm: int) -> frozenset[int]:
    """Agents whose current waypoint lies in one of the unit's segments."""
    if uatm not in scenario.world.uatms:
        raise InvariantError(f"uatm {uatm}", "not declared in scenario")
    program = merge_programs(_facts_program(scenario), parse_program(_COVERED_AGENT_RULE))
    model = solve_program(program)
    return frozenset(a for a, tm in query(model, "covered_agent", 2) if tm == uatm)


def uncovered_heading_agents(
    scenario: ScenarioDoc,
    uatm: int,
    closed: Edge,
    target: int,
    staging: Edge | None = None,
) -> frozenset[int]:
    """Agents the unit cannot reach that still plan through the closed
    corridor toward the target; ``staging`` restricts to one corridor."""
    world = scenario.world
    if uatm not in world.uatms:
        raise InvariantError(f"uatm {uatm}", "not declared in scenario")
    if not world.knows(closed):
        raise InvariantError(f"corridor {closed}", "not declared in either direction")
    if staging is not None and not world.knows(staging):
        raise InvariantError(f"corridor {staging}", "not declared in either direction")
    if staging is None:
        loc_literal = "loc(A, T, _, _, _)"
    else:
        loc_literal = f"loc(A, T, {staging[0]}, {staging[1]}, _)"
    head = f"uncovered_by_uatm{uatm}(A)"
    rules = (
        _COVERED_AGENT_RULE
        + _SOURCE_TARGET_RULES
        + f"{head} :- not covered_agent(A, {uatm}), {loc_literal}, "
        + f"plan(A, T, {closed[0]}, {closed[1]}), target(A, {target}).\n"
    )
    program = merge_programs(_facts_program(scenario), parse_program(rules))
    model = solve_program(program)
    return frozenset(a for (a,) in query(model, f"uncovered_by_uatm{uatm}", 1))


def build_detour_program(
    scenario: ScenarioDoc,
    order: DetourOrder,
    include_uncovered: bool = True,
) -> Program:
    """Assemble the full detour program for one order.

    ``include_uncovered=False`` restricts the derivation to agents the
    issuing unit covers directly (no relay rule), which is what a unit can
    do before asking the network for help.
    """
    validate_order(scenario, order)
    k = order.issuing_uatm
    g = order.requesting_vertiport
    x, y = order.closed
    s = order.activation_step
    staging = order.alt_route[0]

    lines: list[str] = [_SOURCE_TARGET_RULES]
    for (u, v) in order.alt_route:
        lines.append(f"new_plan({s}, {u}, {v}).\n")
    lines.append(
        "plan(A, T+1, U, V) :- plan(A, T, U, V), step(T+1), not detour_request(A, T+1).\n"
        "plan(A, T+1, U1, V1) :- plan(A, T, U, V), step(T+1), new_plan(T+1, U1, V1), "
        "detour_request(A, T+1).\n"
    )
    lines.append(_COVERED_AGENT_RULE)
    lines.append(f"covered_by_uatm{k}(A) :- covered_agent(A, {k}).\n")
    if include_uncovered:
        lines.append(
            f"uncovered_by_uatm{k}(A) :- not covered_agent(A, {k}), "
            f"loc(A, T, {staging[0]}, {staging[1]}, _), plan(A, T, {x}, {y}), "
            f"target(A, {g}).\n"
        )
        lines.append(
            f"covered(A, T, TM) :- loc(A, T, U, V, WP), uncovered_by_uatm{k}(A), "
            "covered_wp(U, V, TM, WP).\n"
        )

    # Detour requests lead activation by one step. At activation step 2 the
    # published guard `not step(T-1)` pins T to the first step; for later
    # activations the derivation step is pinned directly.
    def detour_rule(trigger: str) -> str:
        if s == 2:
            return (
                f"detour_request(A, T+1) :- {trigger}, plan(A, T, U, V), "
                f"plan(A, T, {x}, {y}), target(A, {g}), edge_range({x}, {y}, P), "
                f"not loc(A, T, {x}, {y}, P), not step(T-1).\n"
            )
        return (
            f"detour_request(A, {s}) :- {trigger}, plan(A, {s - 1}, U, V), "
            f"plan(A, {s - 1}, {x}, {y}), target(A, {g}), edge_range({x}, {y}, P), "
            f"not loc(A, {s - 1}, {x}, {y}, P).\n"
        )

    lines.append(detour_rule(f"covered_by_uatm{k}(A)"))
    if include_uncovered:
        lines.append(detour_rule("covered(A, T, TM)"))

    adoption = ", ".join(f"plan(A, T, {u}, {v})" for (u, v) in order.alt_route)
    lines.append(f"change_route(A, T) :- {adoption}, detour_request(A, T).\n")
    lines.append(":- not change_route(A, T), new_plan(T, U, V), detour_request(A, T).\n")

    return merge_programs(_facts_program(scenario), parse_program("".join(lines)))


def outcome_from_model(model: Model, order: DetourOrder) -> DetourOutcome:
    """Extract the detour verdict from an evaluated detour program."""
    k = order.issuing_uatm
    return DetourOutcome(
        order=order,
        requests=frozenset((a, t) for a, t in query(model, "detour_request", 2)),
        changes=frozenset((a, t) for a, t in query(model, "change_route", 2)),
        covered=frozenset(a for (a,) in query(model, f"covered_by_uatm{k}", 1)),
        uncovered=frozenset(a for (a,) in query(model, f"uncovered_by_uatm{k}", 1)),
        status=model.status,
        violated=tuple(str(v) for v in model.violated),
        plan_atoms=frozenset(query(model, "plan", 4)),
    )


def evaluate_detour_program(program: Program, order: DetourOrder) -> DetourOutcome:
    return outcome_from_model(solve_program(program), order)


def run_detour(
    scenario: ScenarioDoc,
    order: DetourOrder,
    include_uncovered: bool = True,
) -> DetourOutcome:
    """Build and evaluate the detour program for one order.

    An unsatisfiable model is a verdict, not an error: the outcome carries
    the violated ground constraints.
    """
    program = build_detour_program(scenario, order, include_uncovered)
    return evaluate_detour_program(program, order)


def frame_step_plans(
    scenario: ScenarioDoc, outcome: DetourOutcome
) -> dict[int, dict[int, tuple[Edge, ...]]]:
    """Per-agent, per-step plans after applying the outcome's frame rules.

    Non-detoured agents keep their previous plan at each step; detoured
    agents carry the alternative route from the activation step onward.
    """
    if not outcome.satisfiable:
        raise DetourError("cannot extract plans from an unsatisfiable outcome")
    grouped: dict[int, dict[int, set[Edge]]] = {}
    for (agent, step, u, v) in outcome.plan_atoms:
        grouped.setdefault(agent, {}).setdefault(step, set()).add((u, v))
    plans: dict[int, dict[int, tuple[Edge, ...]]] = {}
    requested = {a for a, _ in outcome.requests}
    activation = outcome.order.activation_step
    closed = outcome.order.closed
    for agent, steps in sorted(grouped.items()):
        plans[agent] = {}
        for step, edges in sorted(steps.items()):
            ordered = order_edges(edges, f"agent {agent} step {step}")
            if agent in requested and step >= activation and closed in ordered:
                raise DetourError(
                    f"agent {agent} still plans through {closed} at step {step}"
                )
            plans[agent][step] = ordered
    return plans
