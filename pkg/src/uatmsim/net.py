"""The UATM coordination network.

A manager reports a congested corridor to the unit responsible for their
vertiport.  That unit reasons out who must detour, locates agents outside
its own coverage by querying its peers, delivers the new route directly or
through the covering peer, waits for acknowledgments, and reports back.

Transport is a deterministic in-memory bus processed in synchronous rounds:
every envelope sent in round r is handled in round r+1, handlers run in
sequence-number order, and per-round timers tick after deliveries in unit-id
order.  Two runs over the same scenario therefore produce byte-identical
traces, which is the test surface for the whole protocol.

Delivery semantics mirror coverage: an agent inside the issuing unit's
coverage acknowledges it directly; an agent reached through a relay confirms
nothing on the bus — the relay watches the agent's plan ledger (the same
telemetry it already monitors) and acknowledges on its behalf once the plan
matches the delivered route.  Hence a completed run carries exactly one
RouteAck per rerouted agent, and a dropped relay delivery can never produce
a false success: the relay has nothing to verify, the deadline passes, and
the manager report names the agent as undelivered.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .detour import DetourOrder, DetourOutcome, run_detour, validate_order
from .world import Edge, ScenarioDoc

DEFAULT_ACK_DEADLINE_ROUNDS = 5

# protocol phases
REASONING = "Reasoning"
LOCATING = "Locating"
DELIVERING = "Delivering"
AWAITING_ACKS = "AwaitingAcks"
REPORTING = "Reporting"
DONE = "Done"
FAILED = "Failed"

TERMINAL_PHASES = (DONE, FAILED)

Endpoint = tuple[str, int]  # ("manager" | "uatm" | "agent", id)


def endpoint_str(endpoint: Endpoint) -> str:
    return f"{endpoint[0]}:{endpoint[1]}"


class ProtocolError(Exception):
    """Request that cannot enter the protocol (no responsible unit, ...)."""


@dataclass(frozen=True)
class Envelope:
    seq: int
    round: int
    src: Endpoint
    dst: Endpoint
    kind: str
    payload: dict

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "seq": self.seq,
                "round": self.round,
                "from": endpoint_str(self.src),
                "to": endpoint_str(self.dst),
                "kind": self.kind,
                "payload": self.payload,
            },
            sort_keys=True,
            separators=(",", ":"),
        )


@dataclass
class ProtocolInstance:
    """Lifecycle of one manager request at its issuing unit."""

    instance_id: int
    order: DetourOrder
    phase: str = REASONING
    outcome: Optional[DetourOutcome] = None
    relay_map: dict = field(default_factory=dict)  # agent -> None (direct) | uatm id
    pending_acks: set = field(default_factory=set)
    acked: set = field(default_factory=set)
    unreachable: set = field(default_factory=set)
    update_seq_by_agent: dict = field(default_factory=dict)
    awaited_responses: dict = field(default_factory=dict)  # agent -> {peer: covers}
    deadline_round: Optional[int] = None
    locating_deadline_round: Optional[int] = None
    report: Optional[dict] = None

    def direct_agents(self) -> list[int]:
        return sorted(a for a, relay in self.relay_map.items() if relay is None)

    def relayed_agents(self) -> list[int]:
        return sorted(a for a, relay in self.relay_map.items() if relay is not None)


def locate_responsible_uatm(scenario: ScenarioDoc, agent: int, asker: int) -> int:
    """Lowest-id unit whose coverage contains the agent's current waypoint.

    The asking unit's own coverage counts: it answers its own query locally,
    peers answer over the network.  Raises :class:`ProtocolError` when no
    unit covers the agent.
    """
    spec = scenario.agent(agent)
    if spec.state is None:
        raise ProtocolError(f"agent {agent} is not in flight")
    covering = scenario.world.covering_uatms(spec.state.corridor, spec.state.waypoint)
    if not covering:
        raise ProtocolError(f"no uatm covers agent {agent}")
    return covering[0]


class UatmNetwork:
    """Deterministic bus plus the per-unit protocol handlers."""

    def __init__(
        self,
        scenario: ScenarioDoc,
        faults: tuple[dict, ...] = (),
        ack_deadline_rounds: int = DEFAULT_ACK_DEADLINE_ROUNDS,
    ):
        self.scenario = scenario
        self.world = scenario.world
        self.faults = list(faults) + list(scenario.faults)
        self.ack_deadline_rounds = ack_deadline_rounds
        self.round = 0
        self.trace: list[Envelope] = []
        self.dropped: set[int] = set()
        self.pending: list[Envelope] = []
        self.instances: dict[int, ProtocolInstance] = {}
        self.events: list[dict] = []
        self.applied_routes: list[tuple[int, tuple[Edge, ...], int]] = []
        # (relay uatm, instance, agent, route, at_step, wrap seq, delivery round)
        self.pending_verifications: list[tuple] = []
        self.plans: dict = {
            (spec.agent, 1): spec.plan.edges
            for spec in scenario.agents
            if spec.plan is not None
        }
        self.locations: dict[int, tuple[Edge, int]] = {
            spec.agent: (spec.state.corridor, spec.state.waypoint)
            for spec in scenario.agents
            if spec.state is not None
        }

    # -- bus ------------------------------------------------------------------

    def _dropped_by_fault(self, env: Envelope) -> bool:
        for fault in self.faults:
            if fault.get("drop_seq") == env.seq:
                return True
            match = fault.get("drop_match")
            if match is None:
                continue
            if "kind" in match and match["kind"] != env.kind:
                continue
            if "to" in match and match["to"] != endpoint_str(env.dst):
                continue
            if "from" in match and match["from"] != endpoint_str(env.src):
                continue
            return True
        return False

    def send(self, src: Endpoint, dst: Endpoint, kind: str, payload: dict) -> Envelope:
        env = Envelope(len(self.trace) + 1, self.round, src, dst, kind, payload)
        self.trace.append(env)
        if self._dropped_by_fault(env):
            self.dropped.add(env.seq)
        else:
            self.pending.append(env)
        return env

    def trace_lines(self) -> list[str]:
        return [e.to_json_line() for e in self.trace]

    def _event(self, kind: str, **data) -> None:
        event = {"round": self.round, "kind": kind}
        event.update(data)
        self.events.append(event)

    # -- request intake ---------------------------------------------------------

    def submit_manager_request(
        self,
        vertiport: int,
        closed: Edge,
        alt_route: tuple[Edge, ...],
        activation_step: int = 2,
    ) -> int:
        """File a corridor closure with the unit responsible for the vertiport.

        Returns the protocol instance id; drive it with
        :meth:`run_until_complete`.
        """
        responsible = self.world.responsible_uatm(vertiport)
        if responsible is None:
            raise ProtocolError(f"no uatm is responsible for vertiport {vertiport}")
        order = DetourOrder(
            closed=closed,
            alt_route=tuple(alt_route),
            activation_step=activation_step,
            requesting_vertiport=vertiport,
            issuing_uatm=responsible,
        )
        validate_order(self.scenario, order)
        instance = ProtocolInstance(len(self.instances) + 1, order)
        self.instances[instance.instance_id] = instance
        self.send(
            ("manager", vertiport),
            ("uatm", responsible),
            "DetourRequest",
            {
                "instance": instance.instance_id,
                "closed": list(closed),
                "route": [list(e) for e in alt_route],
                "at_step": activation_step,
            },
        )
        return instance.instance_id

    def run_round(self) -> None:
        """Deliver last round's envelopes, then tick verifications and deadlines."""
        self.round += 1
        due = [e for e in self.pending if e.round == self.round - 1]
        self.pending = [e for e in self.pending if e.round != self.round - 1]
        for env in sorted(due, key=lambda e: e.seq):
            self._dispatch(env)
        self._tick_relays()
        self._tick_deadlines()

    def run_until_complete(self, instance_id: int, max_rounds: int = 100) -> ProtocolInstance:
        instance = self.instances[instance_id]
        for _ in range(max_rounds):
            if instance.phase in TERMINAL_PHASES and not self.pending:
                return instance
            self.run_round()
        raise ProtocolError(f"instance {instance_id} did not terminate in {max_rounds} rounds")

    # -- handlers ----------------------------------------------------------------

    def _dispatch(self, env: Envelope) -> None:
        kind, role = env.kind, env.dst[0]
        if kind == "DetourRequest" and role == "uatm":
            self._on_detour_request(env)
        elif kind == "LocateQuery" and role == "uatm":
            self._on_locate_query(env)
        elif kind == "LocateResponse" and role == "uatm":
            self._on_locate_response(env)
        elif kind == "RouteUpdate" and role == "agent":
            self._on_route_update_agent(env)
        elif kind == "RouteUpdate" and role == "uatm":
            self._on_route_update_relay(env)
        elif kind == "RouteAck" and role == "uatm":
            self.handle_ack(self.instances[env.payload["instance"]], env)
        elif kind == "ManagerReport" and role == "manager":
            self._event("report_delivered", instance=env.payload["instance"])
        else:  # pragma: no cover - no handler emits such envelopes
            self._event("protocol_error", reason=f"no handler for {kind} at {role}")

    def _on_detour_request(self, env: Envelope) -> None:
        instance = self.instances[env.payload["instance"]]
        instance.phase = REASONING
        outcome = run_detour(self.scenario, instance.order)
        instance.outcome = outcome
        issuer = instance.order.issuing_uatm
        if not outcome.satisfiable:
            instance.phase = FAILED
            self._report(
                instance,
                status="failed",
                reason="unsatisfiable",
                violated=list(outcome.violated),
            )
            return
        affected = list(outcome.affected_agents())
        if not affected:
            instance.phase = DONE
            self._report(instance, status="completed")
            return
        instance.relay_map = {
            a: None for a in affected if a in outcome.covered
        }
        to_locate = [a for a in affected if a not in outcome.covered]
        instance.phase = LOCATING
        if not to_locate:
            self.dispatch_route_updates(instance)
            return
        peers = sorted(self.world.uatms - {issuer})
        if not peers:
            for agent in to_locate:
                instance.unreachable.add(agent)
                self._event("unreachable_agent", instance=instance.instance_id, agent=agent)
            self.dispatch_route_updates(instance)
            return
        for agent in sorted(to_locate):
            instance.awaited_responses[agent] = {peer: None for peer in peers}
            for peer in peers:
                self.send(
                    ("uatm", issuer),
                    ("uatm", peer),
                    "LocateQuery",
                    {"instance": instance.instance_id, "agent": agent},
                )
        instance.locating_deadline_round = self.round + self.ack_deadline_rounds

    def _on_locate_query(self, env: Envelope) -> None:
        me = env.dst[1]
        agent = env.payload["agent"]
        loc = self.locations.get(agent)
        covers = loc is not None and me in self.world.covering_uatms(loc[0], loc[1])
        self.send(
            env.dst,
            env.src,
            "LocateResponse",
            {"instance": env.payload["instance"], "agent": agent, "covers": covers},
        )

    def _on_locate_response(self, env: Envelope) -> None:
        instance = self.instances[env.payload["instance"]]
        agent = env.payload["agent"]
        peer = env.src[1]
        if instance.phase != LOCATING:
            return  # late response after the locating deadline resolved
        if agent in instance.awaited_responses:
            instance.awaited_responses[agent][peer] = env.payload["covers"]
        if any(
            answer is None
            for answers in instance.awaited_responses.values()
            for answer in answers.values()
        ):
            return
        self._resolve_locations(instance)

    def _resolve_locations(self, instance: ProtocolInstance) -> None:
        """Pick relays from the collected answers; unanswered means uncovered."""
        for agent in sorted(instance.awaited_responses):
            answers = instance.awaited_responses[agent]
            coverers = sorted(peer for peer, covers in answers.items() if covers)
            if coverers:
                instance.relay_map[agent] = coverers[0]
            else:
                instance.unreachable.add(agent)
                self._event(
                    "unreachable_agent", instance=instance.instance_id, agent=agent
                )
        instance.awaited_responses = {}
        self.dispatch_route_updates(instance)

    def dispatch_route_updates(self, instance: ProtocolInstance) -> list[Envelope]:
        """One RouteUpdate per reachable affected agent: direct or wrapped."""
        instance.phase = DELIVERING
        issuer = instance.order.issuing_uatm
        route = [list(e) for e in instance.order.alt_route]
        at_step = instance.order.activation_step
        sent: list[Envelope] = []
        for agent in sorted(instance.relay_map):
            relay = instance.relay_map[agent]
            if relay is None:
                env = self.send(
                    ("uatm", issuer),
                    ("agent", agent),
                    "RouteUpdate",
                    {"instance": instance.instance_id, "route": route, "at_step": at_step},
                )
            else:
                env = self.send(
                    ("uatm", issuer),
                    ("uatm", relay),
                    "RouteUpdate",
                    {
                        "instance": instance.instance_id,
                        "agent": agent,
                        "route": route,
                        "at_step": at_step,
                    },
                )
            instance.update_seq_by_agent[agent] = env.seq
            sent.append(env)
        instance.pending_acks = set(instance.relay_map)
        instance.phase = AWAITING_ACKS
        instance.deadline_round = self.round + self.ack_deadline_rounds
        if not instance.pending_acks:
            self._finish(instance)
        return sent

    def _on_route_update_agent(self, env: Envelope) -> None:
        agent = env.dst[1]
        instance = self.instances[env.payload["instance"]]
        route = tuple(tuple(e) for e in env.payload["route"])
        at_step = env.payload["at_step"]
        self.plans[(agent, at_step)] = route
        self.applied_routes.append((agent, route, at_step))
        self._event("route_applied", instance=instance.instance_id, agent=agent)
        if env.src == ("uatm", instance.order.issuing_uatm):
            # inside the issuer's coverage: acknowledge it directly
            self.send(
                ("agent", agent),
                env.src,
                "RouteAck",
                {
                    "instance": instance.instance_id,
                    "agent": agent,
                    "ref_seq": env.seq,
                },
            )
        # otherwise the relaying unit watches the plan ledger and acks

    def _on_route_update_relay(self, env: Envelope) -> None:
        me = env.dst[1]
        agent = env.payload["agent"]
        delivery = self.send(
            env.dst,
            ("agent", agent),
            "RouteUpdate",
            {
                "instance": env.payload["instance"],
                "route": env.payload["route"],
                "at_step": env.payload["at_step"],
                "relayed_by": me,
            },
        )
        self.pending_verifications.append(
            (
                me,
                env.payload["instance"],
                agent,
                tuple(tuple(e) for e in env.payload["route"]),
                env.payload["at_step"],
                env.seq,  # the issuer's wrap envelope is what the ack references
                delivery.round + 1,
            )
        )

    def _tick_relays(self) -> None:
        remaining: list[tuple] = []
        for entry in sorted(self.pending_verifications):
            relay, instance_id, agent, route, at_step, wrap_seq, due_round = entry
            instance = self.instances[instance_id]
            if instance.phase in TERMINAL_PHASES:
                continue
            if self.round >= due_round and self.plans.get((agent, at_step)) == route:
                self.send(
                    ("uatm", relay),
                    ("uatm", instance.order.issuing_uatm),
                    "RouteAck",
                    {"instance": instance_id, "agent": agent, "ref_seq": wrap_seq},
                )
            else:
                remaining.append(entry)
        self.pending_verifications = remaining

    def handle_ack(self, instance: ProtocolInstance, env: Envelope) -> ProtocolInstance:
        """Process one RouteAck at the issuing unit."""
        agent = env.payload.get("agent")
        ref = env.payload.get("ref_seq")
        if instance.phase != AWAITING_ACKS:
            self._event(
                "protocol_error",
                instance=instance.instance_id,
                reason=f"ack outside AwaitingAcks (phase {instance.phase})",
            )
            return instance
        if ref not in instance.update_seq_by_agent.values():
            self._event(
                "protocol_error",
                instance=instance.instance_id,
                reason=f"ack references unknown update seq {ref}",
            )
            return instance
        if agent in instance.acked:
            self._event(
                "duplicate_ack", instance=instance.instance_id, agent=agent
            )
            return instance
        if agent not in instance.pending_acks:
            self._event(
                "protocol_error",
                instance=instance.instance_id,
                reason=f"ack for unexpected agent {agent}",
            )
            return instance
        instance.pending_acks.discard(agent)
        instance.acked.add(agent)
        self._event("ack_received", instance=instance.instance_id, agent=agent)
        if not instance.pending_acks:
            self._finish(instance)
        return instance

    def _finish(self, instance: ProtocolInstance) -> None:
        instance.phase = REPORTING
        if instance.unreachable:
            self._report(
                instance,
                status="failed",
                reason="unreachable agents",
                undelivered=sorted(instance.unreachable),
            )
            instance.phase = FAILED
        else:
            self._report(instance, status="completed")
            instance.phase = DONE

    def _tick_deadlines(self) -> None:
        for instance in self.instances.values():
            if (
                instance.phase == LOCATING
                and instance.locating_deadline_round is not None
                and self.round >= instance.locating_deadline_round
            ):
                # silence counts as non-coverage: fail those agents, carry on
                for answers in instance.awaited_responses.values():
                    for peer, covers in answers.items():
                        if covers is None:
                            answers[peer] = False
                self._resolve_locations(instance)
            if instance.phase != AWAITING_ACKS or instance.deadline_round is None:
                continue
            if self.round >= instance.deadline_round:
                instance.phase = FAILED
                self._report(
                    instance,
                    status="failed",
                    reason="ack deadline expired",
                    undelivered=sorted(instance.pending_acks | instance.unreachable),
                )

    def _report(self, instance: ProtocolInstance, status: str, **extra) -> None:
        payload = {
            "instance": instance.instance_id,
            "status": status,
            "rerouted": sorted(instance.acked),
            "direct": instance.direct_agents(),
            "relayed": instance.relayed_agents(),
            "undelivered": sorted(instance.pending_acks | instance.unreachable),
        }
        payload.update(extra)
        instance.report = payload
        self.send(
            ("uatm", instance.order.issuing_uatm),
            ("manager", instance.order.requesting_vertiport),
            "ManagerReport",
            payload,
        )
