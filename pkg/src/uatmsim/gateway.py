"""Session lifecycle, command journal, and the unified event stream.

A session wraps one scenario: a rolling :class:`~uatmsim.sim.SimState`, the
set of corridors already closed, pending fault injections, and an append-only
event stream.  Every command is journaled (canonical JSON, one line) before
it executes; replaying the journal against the same scenario document
reproduces the session state and event stream byte-for-byte, which is how
the whole stack is regression-tested.

Commands: ``step``, ``close_corridor`` (runs the full manager-request
protocol over a snapshot of the current state and applies the delivered
routes), ``inject_fault``, and ``export_trace``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Union

from . import sim
from .net import UatmNetwork
from .world import Edge, ScenarioDoc, load_scenario


class GatewayError(Exception):
    pass


class SessionNotFound(GatewayError):
    def __init__(self, session_id: str):
        super().__init__(f"no such session: {session_id}")


class CommandError(GatewayError):
    """Command rejected or failed; the attempt stays journaled."""


COMMAND_ACTIONS = ("step", "close_corridor", "inject_fault", "export_trace")


def canonical_line(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


@dataclass
class Session:
    session_id: str
    scenario: ScenarioDoc
    state: sim.SimState
    speed: int = 1
    congestion_threshold: float = sim.DEFAULT_CONGESTION_THRESHOLD
    journal: list = field(default_factory=list)  # canonical command lines
    events: list = field(default_factory=list)  # event dicts, append-only
    protocols: list = field(default_factory=list)  # per-instance summaries
    closed_corridors: set = field(default_factory=set)
    pending_faults: list = field(default_factory=list)
    subscribers: list = field(default_factory=list)  # callables fed event dicts
    _sim_events_seen: int = 0

    def event_lines(self) -> list[str]:
        return [canonical_line(e) for e in self.events]

    def export_trace(self) -> str:
        return "\n".join(self.event_lines()) + ("\n" if self.events else "")


class Gateway:
    """All live sessions of one process; commands serialize per session."""

    def __init__(self):
        self.sessions: dict[str, Session] = {}
        self._counter = 0

    # -- sessions ---------------------------------------------------------

    def create_session(
        self,
        document: Union[str, dict, ScenarioDoc],
        speed: int = 1,
        congestion_threshold: float = sim.DEFAULT_CONGESTION_THRESHOLD,
    ) -> Session:
        scenario = (
            document if isinstance(document, ScenarioDoc) else load_scenario(document)
        )
        self._counter += 1
        session = Session(
            session_id=f"s{self._counter}",
            scenario=scenario,
            state=sim.initial_state(scenario),
            speed=speed,
            congestion_threshold=congestion_threshold,
        )
        self.sessions[session.session_id] = session
        self._emit(
            session,
            {
                "type": "session",
                "kind": "created",
                "name": scenario.metadata.get("name", ""),
                "in_flight": len(session.state.agent_states),
                "horizon": scenario.world.horizon,
            },
        )
        return session

    def get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise SessionNotFound(session_id)
        return session

    # -- events -------------------------------------------------------------

    def _emit(self, session: Session, event: dict) -> None:
        session.events.append(event)
        for push in session.subscribers:
            push(event)

    def _emit_new_sim_events(self, session: Session) -> list[dict]:
        fresh = session.state.events[session._sim_events_seen:]
        session._sim_events_seen = len(session.state.events)
        out = []
        for e in fresh:
            doc = {"type": "sim", "step": e.step, "kind": e.kind}
            doc.update(e.payload)
            self._emit(session, doc)
            out.append(doc)
        return out

    # -- commands -------------------------------------------------------------

    def command(self, session_id: str, action: dict) -> dict:
        """Journal and execute one command; returns the command result."""
        session = self.get(session_id)
        if not isinstance(action, dict) or action.get("action") not in COMMAND_ACTIONS:
            raise CommandError(
                f"unknown action {action.get('action') if isinstance(action, dict) else action!r}"
            )
        session.journal.append(canonical_line(action))
        self._emit(session, {"type": "command", **action})
        try:
            handler = getattr(self, f"_cmd_{action['action']}")
            return handler(session, action)
        except GatewayError as exc:
            self._emit(session, {"type": "command_error", "error": str(exc)})
            raise
        except Exception as exc:
            self._emit(session, {"type": "command_error", "error": str(exc)})
            raise CommandError(str(exc)) from exc

    def _cmd_step(self, session: Session, action: dict) -> dict:
        speed = action.get("speed", session.speed)
        session.state = sim.advance_step(session.state, speed)
        self._emit_new_sim_events(session)
        alerts = sim.detect_congestion(session.state, session.congestion_threshold)
        for alert in alerts:
            doc = {"type": "sim", "step": alert.step, "kind": alert.kind}
            doc.update(alert.payload)
            self._emit(session, doc)
        return {
            "step": session.state.step,
            "in_flight": list(session.state.in_flight()),
            "arrived": sorted(session.state.arrived),
            "alerts": [list(a.payload["corridor"]) for a in alerts],
        }

    def _cmd_close_corridor(self, session: Session, action: dict) -> dict:
        for key in ("from", "to", "via"):
            if key not in action:
                raise CommandError(f"close_corridor needs '{key}'")
        closed: Edge = (action["from"], action["to"])
        via = action["via"]
        if not isinstance(via, list) or len(via) < 2:
            raise CommandError("'via' must list at least two vertiports")
        route = tuple((via[i], via[i + 1]) for i in range(len(via) - 1))
        world = session.scenario.world
        if not world.knows(closed):
            raise CommandError(f"unknown corridor {closed}")
        if closed in session.closed_corridors or (
            (closed[1], closed[0]) in session.closed_corridors
        ):
            raise CommandError(f"a closure already governs corridor {closed}")
        at_step = action.get("at_step", session.state.step + 1)
        if at_step <= session.state.step:
            raise CommandError(
                f"at_step {at_step} is not after the current step "
                f"{session.state.step} (routes take effect one step after issuance)"
            )
        relative_step = at_step - session.state.step + 1
        snapshot = sim.snapshot_scenario(session.state)
        network = UatmNetwork(snapshot, faults=tuple(session.pending_faults))
        try:
            instance_id = network.submit_manager_request(
                via[-1], closed, route, activation_step=relative_step
            )
            instance = network.run_until_complete(instance_id)
        except Exception as exc:
            raise CommandError(str(exc)) from exc

        for env in network.trace:
            self._emit(
                session,
                {
                    "type": "envelope",
                    "seq": env.seq,
                    "round": env.round,
                    "from": f"{env.src[0]}:{env.src[1]}",
                    "to": f"{env.dst[0]}:{env.dst[1]}",
                    "kind": env.kind,
                    "payload": env.payload,
                },
            )
        for event in network.events:
            self._emit(session, {"type": "protocol", **event})

        for agent, route_applied, rel_step in network.applied_routes:
            abs_step = rel_step + session.state.step - 1
            session.state = sim.apply_route(session.state, agent, route_applied, abs_step)
        self._emit_new_sim_events(session)

        summary = {
            "instance": len(session.protocols) + 1,
            "phase": instance.phase,
            "closed": list(closed),
            "report": instance.report,
        }
        session.protocols.append(summary)
        if instance.phase == "Done":
            session.closed_corridors.add(closed)
        return summary

    def _cmd_inject_fault(self, session: Session, action: dict) -> dict:
        fault = action.get("fault")
        if not isinstance(fault, dict) or not (
            "drop_seq" in fault or "drop_match" in fault
        ):
            raise CommandError("fault must carry drop_seq or drop_match")
        session.pending_faults.append(fault)
        return {"faults": len(session.pending_faults)}

    def _cmd_export_trace(self, session: Session, action: dict) -> dict:
        return {"trace": session.export_trace()}

    # -- inspection ---------------------------------------------------------

    def state_doc(self, session_id: str, include_id: bool = True) -> dict:
        session = self.get(session_id)
        agents = []
        for spec in sorted(session.scenario.agents, key=lambda a: a.agent):
            entry: dict = {"id": spec.agent}
            current = session.state.state_of(spec.agent)
            if current is not None:
                entry["corridor"] = list(current.corridor)
                entry["waypoint"] = current.waypoint
                entry["plan"] = [list(e) for e in session.state.plan_of(spec.agent)]
            elif spec.agent in session.state.arrived:
                entry["arrived"] = True
            agents.append(entry)
        doc = {
            "step": session.state.step,
            "horizon": session.scenario.world.horizon,
            "in_flight": list(session.state.in_flight()),
            "arrived": sorted(session.state.arrived),
            "agents": agents,
            "closed_corridors": sorted(list(c) for c in session.closed_corridors),
            "protocols": session.protocols,
            "config": {
                "speed": session.speed,
                "congestion_threshold": session.congestion_threshold,
            },
            "network": _network_doc(session.scenario),
        }
        if include_id:
            doc = {"session": session.session_id, **doc}
        return doc

    def replay(
        self, document: Union[str, dict, ScenarioDoc], journal_lines: list[str]
    ) -> Session:
        """Re-execute a journal against a fresh session of the same scenario.

        Commands that failed originally fail identically; the resulting
        state and event stream match the live session bit for bit.
        """
        session = self.create_session(document)
        for line in journal_lines:
            action = json.loads(line)
            try:
                self.command(session.session_id, action)
            except CommandError:
                pass  # the failure itself is part of the replayed history
        return session


def _network_doc(scenario: ScenarioDoc) -> dict:
    world = scenario.world
    return {
        "vertiports": sorted(world.vertiports),
        "uatms": sorted(world.uatms),
        "corridors": [
            {"from": c.from_vp, "to": c.to_vp, "waypoints": c.waypoints}
            for c in world.corridors
        ],
        "coverage": [
            {"from": s.from_vp, "to": s.to_vp, "uatm": s.uatm, "lo": s.lo, "hi": s.hi}
            for s in world.coverage
        ],
        "vertiport_cover": [
            {"uatm": u, "vertiport": v} for (u, v) in world.vertiport_cover
        ],
    }
