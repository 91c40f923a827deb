/** The console's mirrored session state.
 *
 * The view renders only server-acknowledged facts: the network document from
 * the state endpoint plus whatever the event stream (equivalently, the
 * exported trace) says happened. Nothing about the protocol is derived
 * client-side; agent positions, congestion, and plan updates all come from
 * trace lines.
 */

import { AgentDoc, Edge, EventLine, NetworkDoc, SessionStateDoc } from "./types.js";

export interface AgentView {
  id: number;
  corridor?: Edge;
  waypoint?: number;
  arrived?: boolean;
  detoured?: boolean;
}

export interface ViewModel {
  session: string;
  step: number;
  horizon: number;
  network: NetworkDoc;
  agents: Map<number, AgentView>;
  congested: Edge[];
  closed: Edge[];
  eventCount: number;
}

export function initialViewModel(state: SessionStateDoc): ViewModel {
  const agents = new Map<number, AgentView>();
  for (const doc of state.agents) {
    agents.set(doc.id, agentViewOf(doc));
  }
  return {
    session: state.session,
    step: state.step,
    horizon: state.horizon,
    network: state.network,
    agents,
    congested: [],
    closed: [...state.closed_corridors],
    eventCount: 0,
  };
}

function agentViewOf(doc: AgentDoc): AgentView {
  const view: AgentView = { id: doc.id };
  if (doc.corridor && typeof doc.waypoint === "number") {
    view.corridor = doc.corridor;
    view.waypoint = doc.waypoint;
  }
  if (doc.arrived) view.arrived = true;
  return view;
}

/** Fold one event line into the view; returns the same (mutated) model. */
export function applyEvent(view: ViewModel, line: EventLine): ViewModel {
  view.eventCount += 1;
  if (line.type === "sim") {
    const agent = line["agent"] as number | undefined;
    switch (line.kind) {
      case "moved": {
        const entry = view.agents.get(agent!) ?? { id: agent! };
        entry.corridor = line["corridor"] as Edge;
        entry.waypoint = line["waypoint"] as number;
        view.agents.set(agent!, entry);
        view.step = line["step"] as number;
        break;
      }
      case "transitioned": {
        const entry = view.agents.get(agent!) ?? { id: agent! };
        entry.corridor = line["to"] as Edge;
        entry.waypoint = line["waypoint"] as number;
        view.agents.set(agent!, entry);
        view.step = line["step"] as number;
        break;
      }
      case "arrived": {
        const entry = view.agents.get(agent!) ?? { id: agent! };
        entry.arrived = true;
        delete entry.corridor;
        delete entry.waypoint;
        view.agents.set(agent!, entry);
        view.step = line["step"] as number;
        break;
      }
      case "congestion_alert": {
        const corridor = line["corridor"] as Edge;
        if (!view.congested.some((c) => c[0] === corridor[0] && c[1] === corridor[1])) {
          view.congested.push(corridor);
        }
        break;
      }
      case "detour_applied": {
        const entry = view.agents.get(agent!) ?? { id: agent! };
        entry.detoured = true;
        view.agents.set(agent!, entry);
        break;
      }
    }
  }
  if (line.type === "command" && line["action"] === "close_corridor") {
    view.closed.push([line["from"] as number, line["to"] as number]);
  }
  return view;
}

export function applyEvents(view: ViewModel, lines: EventLine[]): ViewModel {
  for (const line of lines) applyEvent(view, line);
  return view;
}
