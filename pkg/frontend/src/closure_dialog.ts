/** The corridor-closure dialog: client-side route validation, command
 * construction, and protocol-phase tracking from the event stream.
 *
 * Validation here is a convenience only; the gateway revalidates every
 * command. The command object built here is what gets POSTed, and its
 * canonical form must match the journal line the gateway writes — that is
 * the command-echo contract with the CLI.
 */

import { canonicalJson } from "./canonical.js";
import {
  Edge,
  EventLine,
  NetworkDoc,
  isEnvelope,
  reversed,
  sameEdge,
} from "./types.js";

export interface ClosureCommand {
  action: "close_corridor";
  from: number;
  to: number;
  via: number[];
  at_step: number;
}

export function validateViaRoute(
  network: NetworkDoc,
  closed: Edge,
  via: number[],
): string[] {
  const problems: string[] = [];
  if (via.length < 2) {
    problems.push("route needs at least two vertiports");
    return problems;
  }
  const known = new Set(network.vertiports);
  for (const v of via) {
    if (!known.has(v)) problems.push(`unknown vertiport ${v}`);
  }
  const corridors = network.corridors.map((c) => [c.from, c.to] as Edge);
  const knowsEdge = (e: Edge) =>
    corridors.some((c) => sameEdge(c, e) || sameEdge(reversed(c), e));
  const seen = new Set<number>([via[0]!]);
  for (let i = 0; i + 1 < via.length; i++) {
    const edge: Edge = [via[i]!, via[i + 1]!];
    if (!knowsEdge(edge)) {
      problems.push(`no corridor between ${edge[0]} and ${edge[1]}`);
    }
    if (sameEdge(edge, closed) || sameEdge(edge, reversed(closed))) {
      problems.push(`route uses the closed corridor (${closed[0]},${closed[1]})`);
    }
    if (seen.has(edge[1])) {
      problems.push(`route visits vertiport ${edge[1]} twice`);
    }
    seen.add(edge[1]);
  }
  return problems;
}

export function buildClosureCommand(
  closed: Edge,
  via: number[],
  atStep: number,
): ClosureCommand {
  return {
    action: "close_corridor",
    from: closed[0],
    to: closed[1],
    via: [...via],
    at_step: atStep,
  };
}

/** The journal line the gateway will write for this command. */
export function commandJournalLine(command: ClosureCommand): string {
  return canonicalJson(command);
}

export const PHASE_ORDER = [
  "Reasoning",
  "Locating",
  "Delivering",
  "AwaitingAcks",
  "Done",
  "Failed",
] as const;

export type Phase = (typeof PHASE_ORDER)[number];

/** Phase transitions observed so far, derived purely from envelope kinds.
 * The issuing unit's lifecycle only moves forward, so relay delivery legs
 * that interleave with early acknowledgments never regress the phase. */
export function phasesFromEvents(lines: EventLine[], instance: number): Phase[] {
  const phases: Phase[] = [];
  const rankOf = (p: Phase) => PHASE_ORDER.indexOf(p);
  const push = (p: Phase) => {
    const current = phases[phases.length - 1];
    if (current === "Done" || current === "Failed") return;
    if (current !== undefined && rankOf(p) <= rankOf(current)) return;
    phases.push(p);
  };
  for (const line of lines) {
    if (!isEnvelope(line)) continue;
    if (line.payload["instance"] !== instance) continue;
    switch (line.kind) {
      case "DetourRequest":
        push("Reasoning");
        break;
      case "LocateQuery":
        push("Locating");
        break;
      case "RouteUpdate":
        push("Delivering");
        break;
      case "RouteAck":
        push("AwaitingAcks");
        break;
      case "ManagerReport":
        push(line.payload["status"] === "completed" ? "Done" : "Failed");
        break;
    }
  }
  return phases;
}
