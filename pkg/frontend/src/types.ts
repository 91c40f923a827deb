/** Shared shapes mirrored from the gateway's documented JSON surfaces. */

export type Edge = [number, number];

export interface CorridorDoc {
  from: number;
  to: number;
  waypoints: number;
}

export interface CoverageDoc {
  from: number;
  to: number;
  uatm: number;
  lo: number;
  hi: number;
}

export interface NetworkDoc {
  vertiports: number[];
  uatms: number[];
  corridors: CorridorDoc[];
  coverage: CoverageDoc[];
  vertiport_cover: { uatm: number; vertiport: number }[];
}

export interface AgentDoc {
  id: number;
  corridor?: Edge;
  waypoint?: number;
  plan?: Edge[];
  arrived?: boolean;
}

export interface SessionStateDoc {
  session: string;
  step: number;
  horizon: number;
  in_flight: number[];
  arrived: number[];
  agents: AgentDoc[];
  closed_corridors: Edge[];
  protocols: unknown[];
  config: { speed: number; congestion_threshold: number };
  network: NetworkDoc;
}

/** One line of the exported trace / event stream. */
export interface EventLine {
  type: "session" | "command" | "command_error" | "sim" | "envelope" | "protocol";
  kind?: string;
  [key: string]: unknown;
}

export interface EnvelopeLine extends EventLine {
  type: "envelope";
  seq: number;
  round: number;
  from: string;
  to: string;
  kind: string;
  payload: Record<string, unknown>;
}

export function isEnvelope(line: EventLine): line is EnvelopeLine {
  return line.type === "envelope";
}

export function parseEventLine(raw: string): EventLine {
  return JSON.parse(raw) as EventLine;
}

export function endpointRole(endpoint: string): string {
  return endpoint.split(":")[0] ?? "";
}

export function endpointId(endpoint: string): number {
  return Number(endpoint.split(":")[1] ?? NaN);
}

export function sameEdge(a: Edge, b: Edge): boolean {
  return a[0] === b[0] && a[1] === b[1];
}

export function reversed(edge: Edge): Edge {
  return [edge[1], edge[0]];
}
