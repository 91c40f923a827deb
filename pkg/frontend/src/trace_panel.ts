/** The reasoning-trace panel: everything it shows is read off the exported
 * trace lines — covered/uncovered sets, detour requests, route changes,
 * relay hops, acknowledgments, and violated constraints — with each entry
 * pointing back at the trace line (its seq) it came from. */

import {
  EnvelopeLine,
  EventLine,
  endpointId,
  endpointRole,
  isEnvelope,
} from "./types.js";

export interface LinkedAgents {
  agents: number[];
  seqs: number[]; // trace lines backing the entry
}

export interface TracePanel {
  instance: number;
  status: "completed" | "failed" | "pending";
  covered: LinkedAgents; // delivered directly by the issuing unit
  uncovered: LinkedAgents; // delivered through a relay
  requests: { agent: number; step: number; seq: number }[];
  changes: LinkedAgents; // acknowledged route adoptions
  relays: { agent: number; via: number; seq: number }[];
  acks: { agent: number; from: string; seq: number }[];
  undelivered: number[];
  violated: string[];
  report_seq: number | null;
}

function envelopesOf(lines: EventLine[], instance: number): EnvelopeLine[] {
  return lines
    .filter(isEnvelope)
    .filter((l) => l.payload["instance"] === instance);
}

export function instancesInTrace(lines: EventLine[]): number[] {
  const ids = new Set<number>();
  for (const line of lines.filter(isEnvelope)) {
    const instance = line.payload["instance"];
    if (typeof instance === "number") ids.add(instance);
  }
  return [...ids].sort((a, b) => a - b);
}

export function buildTracePanel(lines: EventLine[], instance: number): TracePanel {
  const envelopes = envelopesOf(lines, instance);
  const covered: LinkedAgents = { agents: [], seqs: [] };
  const uncovered: LinkedAgents = { agents: [], seqs: [] };
  const requests: TracePanel["requests"] = [];
  const changes: LinkedAgents = { agents: [], seqs: [] };
  const relays: TracePanel["relays"] = [];
  const acks: TracePanel["acks"] = [];
  let status: TracePanel["status"] = "pending";
  let undelivered: number[] = [];
  let violated: string[] = [];
  let reportSeq: number | null = null;

  for (const env of envelopes) {
    if (env.kind === "RouteUpdate" && endpointRole(env.to) === "agent") {
      const agent = endpointId(env.to);
      const step = env.payload["at_step"] as number;
      requests.push({ agent, step, seq: env.seq });
      if ("relayed_by" in env.payload) {
        uncovered.agents.push(agent);
        uncovered.seqs.push(env.seq);
      } else {
        covered.agents.push(agent);
        covered.seqs.push(env.seq);
      }
    }
    if (env.kind === "RouteUpdate" && endpointRole(env.to) === "uatm") {
      relays.push({
        agent: env.payload["agent"] as number,
        via: endpointId(env.to),
        seq: env.seq,
      });
    }
    if (env.kind === "RouteAck") {
      const agent = env.payload["agent"] as number;
      acks.push({ agent, from: env.from, seq: env.seq });
      changes.agents.push(agent);
      changes.seqs.push(env.seq);
    }
    if (env.kind === "ManagerReport") {
      status = env.payload["status"] === "completed" ? "completed" : "failed";
      undelivered = (env.payload["undelivered"] as number[]) ?? [];
      violated = (env.payload["violated"] as string[]) ?? [];
      reportSeq = env.seq;
    }
  }

  const sortLinked = (l: LinkedAgents) => {
    const pairs = l.agents.map((a, i) => [a, l.seqs[i]!] as const);
    pairs.sort((x, y) => x[0] - y[0]);
    l.agents = pairs.map((p) => p[0]);
    l.seqs = pairs.map((p) => p[1]);
  };
  sortLinked(covered);
  sortLinked(uncovered);
  sortLinked(changes);
  requests.sort((a, b) => a.agent - b.agent);
  relays.sort((a, b) => a.agent - b.agent);
  acks.sort((a, b) => a.seq - b.seq);

  return {
    instance,
    status,
    covered,
    uncovered,
    requests,
    changes,
    relays,
    acks,
    undelivered,
    violated,
    report_seq: reportSeq,
  };
}

/** Plain-text rendering used by the panel body (and easy to assert on). */
export function renderTracePanel(panel: TracePanel): string {
  const ids = (xs: number[]) => (xs.length ? xs.join(" ") : "none");
  const lines = [
    `instance ${panel.instance}: ${panel.status}`,
    `covered (direct): ${ids(panel.covered.agents)}`,
    `uncovered (relayed): ${ids(panel.uncovered.agents)}`,
    `detour requests: ${
      panel.requests.length
        ? panel.requests.map((r) => `${r.agent}@${r.step}`).join(" ")
        : "no agents required detour"
    }`,
    `route changes acknowledged: ${ids(panel.changes.agents)}`,
    `relay hops: ${
      panel.relays.length
        ? panel.relays.map((r) => `agent ${r.agent} via unit ${r.via}`).join(", ")
        : "none"
    }`,
  ];
  if (panel.undelivered.length) {
    lines.push(`undelivered: ${ids(panel.undelivered)}`);
  }
  for (const v of panel.violated) {
    lines.push(`violated: ${v}`);
  }
  return lines.join("\n");
}
