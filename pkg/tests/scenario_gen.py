"""Seeded random scenarios, detour orders, and rule programs for testing."""

from __future__ import annotations

import random

from uatmsim.detour import DetourOrder, validate_order
from uatmsim.world import ScenarioDoc, load_scenario, target_of


def random_scenario_doc(rng: random.Random) -> dict:
    """A valid scenario document: <=10 vertiports, <=12 agents, <=4 steps."""
    n_vp = rng.randint(2, 10)
    vertiports = list(range(1, n_vp + 1))
    chain = vertiports[:]
    rng.shuffle(chain)

    corridors = []
    seen_pairs = set()
    for a, b in zip(chain, chain[1:]):
        corridors.append({"from": a, "to": b, "waypoints": rng.randint(3, 12)})
        seen_pairs.add(frozenset((a, b)))
    for _ in range(rng.randint(0, 4)):
        a, b = rng.sample(vertiports, 2)
        if frozenset((a, b)) in seen_pairs:
            continue
        seen_pairs.add(frozenset((a, b)))
        corridors.append({"from": a, "to": b, "waypoints": rng.randint(3, 12)})

    n_uatm = rng.randint(1, 3)
    uatms = list(range(1, n_uatm + 1))
    coverage = []
    for c in corridors:
        for u in uatms:
            if rng.random() < 0.5:
                lo = rng.randint(1, c["waypoints"])
                hi = rng.randint(lo, c["waypoints"])
                coverage.append(
                    {"from": c["from"], "to": c["to"], "uatm": u, "lo": lo, "hi": hi}
                )
    vertiport_cover = []
    for u in uatms:
        for v in rng.sample(vertiports, min(len(vertiports), rng.randint(1, 2))):
            vertiport_cover.append({"uatm": u, "vertiport": v})

    # directed adjacency including implicit reverse traversal
    lengths = {(c["from"], c["to"]): c["waypoints"] for c in corridors}
    adjacency: dict[int, list[tuple[int, int]]] = {v: [] for v in vertiports}
    for (a, b) in lengths:
        adjacency[a].append((a, b))
        adjacency[b].append((b, a))

    def random_path() -> list[tuple[int, int]] | None:
        start = rng.choice(vertiports)
        path: list[tuple[int, int]] = []
        visited = {start}
        cursor = start
        for _ in range(rng.randint(1, 4)):
            options = [e for e in adjacency[cursor] if e[1] not in visited]
            if not options:
                break
            edge = rng.choice(options)
            path.append(edge)
            visited.add(edge[1])
            cursor = edge[1]
        return path or None

    def edge_length(edge: tuple[int, int]) -> int:
        return lengths.get(edge) or lengths[(edge[1], edge[0])]

    agents = []
    for agent_id in range(1, rng.randint(0, 12) + 1):
        if rng.random() < 0.15:
            agents.append({"id": agent_id})
            continue
        path = random_path()
        if path is None:
            agents.append({"id": agent_id})
            continue
        first = path[0]
        agents.append(
            {
                "id": agent_id,
                "corridor": {"from": first[0], "to": first[1]},
                "waypoint": rng.randint(1, edge_length(first)),
                "plan": [list(e) for e in path],
            }
        )

    return {
        "metadata": {"name": f"random-{rng.random():.6f}"},
        "vertiports": vertiports,
        "uatms": uatms,
        "horizon": rng.randint(2, 4),
        "corridors": corridors,
        "vertiport_cover": vertiport_cover,
        "coverage": coverage,
        "agents": agents,
    }


def random_scenario(rng: random.Random) -> ScenarioDoc:
    return load_scenario(random_scenario_doc(rng))


def random_order(rng: random.Random, scenario: ScenarioDoc) -> DetourOrder | None:
    """A valid order closing an edge some agent plans through, if one exists."""
    world = scenario.world
    candidates = [
        spec
        for spec in scenario.agents
        if spec.plan is not None and len(spec.plan.edges) >= 2
    ]
    rng.shuffle(candidates)

    adjacency: dict[int, list[tuple[int, int]]] = {v: [] for v in world.vertiports}
    for c in world.corridors:
        adjacency[c.from_vp].append((c.from_vp, c.to_vp))
        adjacency[c.to_vp].append((c.to_vp, c.from_vp))

    def find_route(target: int, closed: tuple[int, int]) -> tuple | None:
        banned = {closed, (closed[1], closed[0])}
        for _ in range(12):
            start = rng.choice(sorted(world.vertiports))
            path: list[tuple[int, int]] = []
            visited = {start}
            cursor = start
            for _ in range(5):
                if cursor == target and path:
                    return tuple(path)
                options = [
                    e
                    for e in adjacency[cursor]
                    if e not in banned and e[1] not in visited
                ]
                if not options:
                    break
                edge = rng.choice(options)
                path.append(edge)
                visited.add(edge[1])
                cursor = edge[1]
            if cursor == target and path:
                return tuple(path)
        return None

    for spec in candidates:
        closed = spec.plan.edges[rng.randint(1, len(spec.plan.edges) - 1)]
        target = target_of(spec.plan)
        route = find_route(target, closed)
        if route is None:
            continue
        # prefer a unit that actually covers the agent so detour requests
        # (and, with damaged facts, unsatisfiable runs) actually occur
        if spec.state is not None and rng.random() < 0.8:
            covering = world.covering_uatms(spec.state.corridor, spec.state.waypoint)
            issuing = covering[0] if covering else rng.choice(sorted(world.uatms))
        else:
            issuing = rng.choice(sorted(world.uatms))
        activation = 2 if rng.random() < 0.7 else rng.randint(2, world.horizon)
        order = DetourOrder(
            closed=closed,
            alt_route=route,
            activation_step=activation,
            requesting_vertiport=target,
            issuing_uatm=issuing,
        )
        try:
            validate_order(scenario, order)
        except Exception:
            continue
        return order
    return None
