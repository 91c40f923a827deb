"""World model and scenario documents.

A scenario is a JSON document describing the vertiport network (corridors
subdivided into integer waypoints, coverage segments per traffic-management
unit) together with the agents in flight: where each one currently is and
the edge sequence it plans to fly.  :func:`load_scenario` validates the
document; :func:`to_facts` turns it into the ground fact base the reasoner
consumes.

Waypoints are indexed 1..n in the corridor's declared traversal direction.
The reverse direction is flyable with the same waypoint count (waypoint k of
(v,u) sits at physical position n+1-k of (u,v)), but coverage segments apply
only to the direction they are declared for.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from .reasoner.syntax import GroundAtom


class ScenarioError(Exception):
    """Base class for scenario loading problems."""


class SchemaError(ScenarioError):
    """Structurally invalid document; carries the offending JSON path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class InvariantError(ScenarioError):
    """Well-formed document that breaks a world-model rule."""

    def __init__(self, entity: str, rule: str):
        super().__init__(f"{entity}: {rule}")
        self.entity = entity
        self.rule = rule


class PlanError(ScenarioError):
    """A flight plan that is empty or not a simple connected path."""


Edge = tuple[int, int]


@dataclass(frozen=True)
class Corridor:
    from_vp: int
    to_vp: int
    waypoints: int

    @property
    def edge(self) -> Edge:
        return (self.from_vp, self.to_vp)


@dataclass(frozen=True)
class CoverageSegment:
    from_vp: int
    to_vp: int
    uatm: int
    lo: int
    hi: int

    @property
    def edge(self) -> Edge:
        return (self.from_vp, self.to_vp)

    def contains(self, waypoint: int) -> bool:
        return self.lo <= waypoint <= self.hi


@dataclass(frozen=True)
class AgentState:
    agent: int
    step: int
    corridor: Edge
    waypoint: int


@dataclass(frozen=True)
class FlightPlan:
    agent: int
    step: int
    edges: tuple[Edge, ...]


@dataclass(frozen=True)
class AgentSpec:
    """One fleet member: optionally located and optionally carrying a plan."""

    agent: int
    state: Optional[AgentState] = None
    plan: Optional[FlightPlan] = None


@dataclass(frozen=True)
class WorldModel:
    vertiports: frozenset[int]
    corridors: tuple[Corridor, ...]
    uatms: frozenset[int]
    vertiport_cover: tuple[tuple[int, int], ...]  # (uatm, vertiport)
    coverage: tuple[CoverageSegment, ...]
    horizon: int

    def corridor_lengths(self) -> dict[Edge, int]:
        return {c.edge: c.waypoints for c in self.corridors}

    def declared(self, edge: Edge) -> bool:
        return any(c.edge == edge for c in self.corridors)

    def knows(self, edge: Edge) -> bool:
        return self.declared(edge) or self.declared((edge[1], edge[0]))

    def waypoint_count(self, edge: Edge) -> int:
        """Length of a corridor in either traversal direction."""
        for c in self.corridors:
            if c.edge == edge or c.edge == (edge[1], edge[0]):
                return c.waypoints
        raise InvariantError(f"corridor {edge}", "not declared in either direction")

    def covering_uatms(self, edge: Edge, waypoint: int) -> tuple[int, ...]:
        """Units whose declared segments contain the directed position."""
        out = sorted(
            {s.uatm for s in self.coverage if s.edge == edge and s.contains(waypoint)}
        )
        return tuple(out)

    def responsible_uatm(self, vertiport: int) -> Optional[int]:
        """Lowest-id unit responsible for a vertiport, or None."""
        candidates = sorted(u for u, v in self.vertiport_cover if v == vertiport)
        return candidates[0] if candidates else None


@dataclass(frozen=True)
class ScenarioDoc:
    world: WorldModel
    agents: tuple[AgentSpec, ...]
    metadata: dict = field(default_factory=dict)
    faults: tuple[dict, ...] = ()

    def located_agents(self) -> tuple[AgentSpec, ...]:
        return tuple(a for a in self.agents if a.state is not None)

    def agent(self, agent_id: int) -> AgentSpec:
        for spec in self.agents:
            if spec.agent == agent_id:
                return spec
        raise InvariantError(f"agent {agent_id}", "not declared in scenario")


# ---------------------------------------------------------------------------
# Flight-plan helpers
# ---------------------------------------------------------------------------

def check_path(edges: tuple[Edge, ...], entity: str) -> None:
    if not edges:
        raise PlanError(f"{entity}: plan is empty")
    for (a, b), (c, d) in zip(edges, edges[1:]):
        if b != c:
            raise PlanError(f"{entity}: edges ({a},{b}) and ({c},{d}) do not connect")
    visited = [edges[0][0]] + [e[1] for e in edges]
    if len(set(visited)) != len(visited):
        raise PlanError(f"{entity}: path visits a vertiport twice")


def source_of(plan: FlightPlan) -> int:
    """First vertiport of a plan; matches the reasoner's source derivation."""
    check_path(plan.edges, f"agent {plan.agent}")
    return plan.edges[0][0]


def target_of(plan: FlightPlan) -> int:
    """Last vertiport of a plan; matches the reasoner's target derivation."""
    check_path(plan.edges, f"agent {plan.agent}")
    return plan.edges[-1][1]


def order_edges(edges, entity: str = "plan") -> tuple[Edge, ...]:
    """Arrange an edge set into its unique simple-path order."""
    edges = list(edges)
    if not edges:
        raise PlanError(f"{entity}: no edges to order")
    froms = {e[0] for e in edges}
    tos = {e[1] for e in edges}
    starts = sorted(froms - tos)
    if len(starts) != 1:
        raise PlanError(f"{entity}: edges do not form a simple path")
    by_from = {}
    for e in edges:
        if e[0] in by_from:
            raise PlanError(f"{entity}: two edges leave vertiport {e[0]}")
        by_from[e[0]] = e
    ordered = []
    cursor = starts[0]
    while cursor in by_from:
        edge = by_from.pop(cursor)
        ordered.append(edge)
        cursor = edge[1]
    if by_from:
        raise PlanError(f"{entity}: edges do not form a connected path")
    return tuple(ordered)


# ---------------------------------------------------------------------------
# Loading and validation
# ---------------------------------------------------------------------------

_TOP_LEVEL_KEYS = {
    "metadata",
    "vertiports",
    "uatms",
    "horizon",
    "corridors",
    "vertiport_cover",
    "coverage",
    "agents",
    "faults",
}


def _require(doc: dict, key: str, kind, path: str):
    if key not in doc:
        raise SchemaError(f"{path}.{key}", "missing required key")
    value = doc[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise SchemaError(f"{path}.{key}", f"expected {kind.__name__}")
    return value


def _int_list(values, path: str) -> list[int]:
    if not isinstance(values, list):
        raise SchemaError(path, "expected an array of integers")
    out = []
    for i, v in enumerate(values):
        if not isinstance(v, int) or isinstance(v, bool):
            raise SchemaError(f"{path}[{i}]", "expected an integer")
        out.append(v)
    return out


def _edge_pair(value, path: str) -> Edge:
    if not isinstance(value, list) or len(value) != 2:
        raise SchemaError(path, "expected [from, to]")
    a, b = value
    if not isinstance(a, int) or not isinstance(b, int):
        raise SchemaError(path, "expected [from, to] integers")
    return (a, b)


def load_scenario(document: Union[str, dict, Path]) -> ScenarioDoc:
    """Parse and fully validate a scenario document.

    Accepts JSON text, a pre-parsed dict, or a filesystem path.  Raises
    :class:`SchemaError` with the offending JSON path for structural
    problems, :class:`InvariantError` naming the entity and broken rule for
    semantic ones.
    """
    if isinstance(document, Path):
        document = document.read_text()
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError("$", f"not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise SchemaError("$", "expected a JSON object")

    unknown = set(document) - _TOP_LEVEL_KEYS
    if unknown:
        raise SchemaError(f"$.{sorted(unknown)[0]}", "unknown key")

    vertiports = frozenset(_int_list(_require(document, "vertiports", list, "$"), "$.vertiports"))
    uatms = frozenset(_int_list(_require(document, "uatms", list, "$"), "$.uatms"))
    horizon = _require(document, "horizon", int, "$")
    if horizon < 1:
        raise InvariantError("horizon", "must be at least 1")

    corridors: list[Corridor] = []
    seen_pairs: set[frozenset] = set()
    for i, entry in enumerate(_require(document, "corridors", list, "$")):
        path = f"$.corridors[{i}]"
        if not isinstance(entry, dict):
            raise SchemaError(path, "expected an object")
        c = Corridor(
            _require(entry, "from", int, path),
            _require(entry, "to", int, path),
            _require(entry, "waypoints", int, path),
        )
        if c.from_vp == c.to_vp:
            raise InvariantError(f"corridor ({c.from_vp},{c.to_vp})", "endpoints must differ")
        if c.from_vp not in vertiports or c.to_vp not in vertiports:
            raise InvariantError(
                f"corridor ({c.from_vp},{c.to_vp})", "endpoint is not a declared vertiport"
            )
        if c.waypoints < 1:
            raise InvariantError(
                f"corridor ({c.from_vp},{c.to_vp})", "waypoint count must be at least 1"
            )
        pair = frozenset((c.from_vp, c.to_vp))
        if pair in seen_pairs:
            raise InvariantError(
                f"corridor ({c.from_vp},{c.to_vp})", "declared twice (directions share one entry)"
            )
        seen_pairs.add(pair)
        corridors.append(c)

    cover: list[tuple[int, int]] = []
    for i, entry in enumerate(_require(document, "vertiport_cover", list, "$")):
        path = f"$.vertiport_cover[{i}]"
        if not isinstance(entry, dict):
            raise SchemaError(path, "expected an object")
        u = _require(entry, "uatm", int, path)
        v = _require(entry, "vertiport", int, path)
        if u not in uatms:
            raise InvariantError(f"vertiport_cover[{i}]", f"uatm {u} not declared")
        if v not in vertiports:
            raise InvariantError(f"vertiport_cover[{i}]", f"vertiport {v} not declared")
        cover.append((u, v))

    lengths = {c.edge: c.waypoints for c in corridors}
    coverage: list[CoverageSegment] = []
    for i, entry in enumerate(_require(document, "coverage", list, "$")):
        path = f"$.coverage[{i}]"
        if not isinstance(entry, dict):
            raise SchemaError(path, "expected an object")
        seg = CoverageSegment(
            _require(entry, "from", int, path),
            _require(entry, "to", int, path),
            _require(entry, "uatm", int, path),
            _require(entry, "lo", int, path),
            _require(entry, "hi", int, path),
        )
        if seg.edge not in lengths:
            raise InvariantError(
                f"coverage[{i}]", f"corridor ({seg.from_vp},{seg.to_vp}) not declared"
            )
        if seg.uatm not in uatms:
            raise InvariantError(f"coverage[{i}]", f"uatm {seg.uatm} not declared")
        if not (1 <= seg.lo <= seg.hi <= lengths[seg.edge]):
            raise InvariantError(
                f"coverage[{i}]",
                f"segment {seg.lo}..{seg.hi} outside waypoint range 1..{lengths[seg.edge]}",
            )
        coverage.append(seg)

    world = WorldModel(
        vertiports=vertiports,
        corridors=tuple(corridors),
        uatms=uatms,
        vertiport_cover=tuple(cover),
        coverage=tuple(coverage),
        horizon=horizon,
    )

    agents: list[AgentSpec] = []
    seen_ids: set[int] = set()
    for i, entry in enumerate(_require(document, "agents", list, "$")):
        path = f"$.agents[{i}]"
        if not isinstance(entry, dict):
            raise SchemaError(path, "expected an object")
        agent_id = _require(entry, "id", int, path)
        if agent_id in seen_ids:
            raise InvariantError(f"agent {agent_id}", "declared twice")
        seen_ids.add(agent_id)

        state = None
        plan = None
        has_loc = "corridor" in entry or "waypoint" in entry
        if has_loc:
            if "corridor" not in entry or "waypoint" not in entry:
                raise SchemaError(path, "corridor and waypoint must appear together")
            corridor_obj = entry["corridor"]
            if not isinstance(corridor_obj, dict):
                raise SchemaError(f"{path}.corridor", "expected an object")
            edge = (
                _require(corridor_obj, "from", int, f"{path}.corridor"),
                _require(corridor_obj, "to", int, f"{path}.corridor"),
            )
            waypoint = _require(entry, "waypoint", int, path)
            if not world.knows(edge):
                raise InvariantError(
                    f"agent {agent_id}", f"corridor {edge} not declared in either direction"
                )
            count = world.waypoint_count(edge)
            if not (1 <= waypoint <= count):
                raise InvariantError(
                    f"agent {agent_id}",
                    f"waypoint {waypoint} outside corridor {edge} range 1..{count}",
                )
            state = AgentState(agent_id, 1, edge, waypoint)
        if "plan" in entry:
            raw = entry["plan"]
            if not isinstance(raw, list) or not raw:
                raise SchemaError(f"{path}.plan", "expected a non-empty array of edges")
            edges = tuple(_edge_pair(e, f"{path}.plan[{j}]") for j, e in enumerate(raw))
            for j, e in enumerate(edges):
                if not world.knows(e):
                    raise InvariantError(
                        f"agent {agent_id}", f"plan edge {e} not declared in either direction"
                    )
            try:
                check_path(edges, f"agent {agent_id}")
            except PlanError as exc:
                raise InvariantError(f"agent {agent_id}", str(exc)) from exc
            plan = FlightPlan(agent_id, 1, edges)
        if state is not None:
            if plan is None:
                raise InvariantError(
                    f"agent {agent_id}", "a located agent needs a step-1 plan"
                )
            if state.corridor not in plan.edges:
                raise InvariantError(
                    f"agent {agent_id}",
                    f"plan does not contain occupied corridor {state.corridor}",
                )
        agents.append(AgentSpec(agent_id, state, plan))

    metadata = document.get("metadata", {})
    if not isinstance(metadata, dict):
        raise SchemaError("$.metadata", "expected an object")
    faults_raw = document.get("faults", [])
    if not isinstance(faults_raw, list):
        raise SchemaError("$.faults", "expected an array")
    for i, f in enumerate(faults_raw):
        if not isinstance(f, dict):
            raise SchemaError(f"$.faults[{i}]", "expected an object")

    return ScenarioDoc(
        world=world,
        agents=tuple(agents),
        metadata=metadata,
        faults=tuple(faults_raw),
    )


def scenario_to_dict(scenario: ScenarioDoc) -> dict:
    """Inverse of :func:`load_scenario`; load(dump(s)) equals s."""
    world = scenario.world
    agents = []
    for spec in scenario.agents:
        entry: dict = {"id": spec.agent}
        if spec.state is not None:
            entry["corridor"] = {
                "from": spec.state.corridor[0],
                "to": spec.state.corridor[1],
            }
            entry["waypoint"] = spec.state.waypoint
        if spec.plan is not None:
            entry["plan"] = [[u, v] for (u, v) in spec.plan.edges]
        agents.append(entry)
    return {
        "metadata": dict(scenario.metadata),
        "vertiports": sorted(world.vertiports),
        "uatms": sorted(world.uatms),
        "horizon": world.horizon,
        "corridors": [
            {"from": c.from_vp, "to": c.to_vp, "waypoints": c.waypoints}
            for c in world.corridors
        ],
        "vertiport_cover": [
            {"uatm": u, "vertiport": v} for (u, v) in world.vertiport_cover
        ],
        "coverage": [
            {"from": s.from_vp, "to": s.to_vp, "uatm": s.uatm, "lo": s.lo, "hi": s.hi}
            for s in world.coverage
        ],
        "agents": agents,
        "faults": [dict(f) for f in scenario.faults],
    }


def fig1_scenario() -> ScenarioDoc:
    """The bundled seven-vertiport demo network with six in-flight agents."""
    return load_scenario(
        (resources.files("uatmsim") / "data" / "fig1.scenario").read_text()
    )


# ---------------------------------------------------------------------------
# Fact emission
# ---------------------------------------------------------------------------

def to_facts(scenario: ScenarioDoc) -> frozenset[GroundAtom]:
    """Ground fact base for the reasoner.

    Emits agent/1, uatm/1, vp/1, edge/2, edge_range/3, cover/2, covered_wp/4
    (one fact per covered waypoint), loc/5, plan/4 and step/1.  Coverage is
    pre-expanded so rule programs never need the segment bounds.
    """
    facts: set[GroundAtom] = set()
    world = scenario.world
    for spec in scenario.agents:
        facts.add(GroundAtom("agent", (spec.agent,)))
    for u in world.uatms:
        facts.add(GroundAtom("uatm", (u,)))
    for v in world.vertiports:
        facts.add(GroundAtom("vp", (v,)))
    for c in world.corridors:
        facts.add(GroundAtom("edge", (c.from_vp, c.to_vp)))
        for p in range(1, c.waypoints + 1):
            facts.add(GroundAtom("edge_range", (c.from_vp, c.to_vp, p)))
    for u, v in world.vertiport_cover:
        facts.add(GroundAtom("cover", (u, v)))
    for seg in world.coverage:
        for p in range(seg.lo, seg.hi + 1):
            facts.add(GroundAtom("covered_wp", (seg.from_vp, seg.to_vp, seg.uatm, p)))
    for spec in scenario.agents:
        if spec.state is not None:
            s = spec.state
            facts.add(GroundAtom("loc", (s.agent, s.step, s.corridor[0], s.corridor[1], s.waypoint)))
        if spec.plan is not None:
            for (u, v) in spec.plan.edges:
                facts.add(GroundAtom("plan", (spec.plan.agent, spec.plan.step, u, v)))
    for t in range(1, world.horizon + 1):
        facts.add(GroundAtom("step", (t,)))
    return frozenset(facts)
