/** Deterministic network map: vertiports on a circle, corridors as lines,
 * per-waypoint agent markers, one coverage overlay per unit, congestion
 * highlighted. Produces a plain scene object plus an SVG string so the
 * rendering is testable without a DOM. */

import { Edge, NetworkDoc, sameEdge } from "./types.js";
import { AgentView, ViewModel } from "./view_model.js";

export interface ScenePoint {
  x: number;
  y: number;
}

export interface SceneNode extends ScenePoint {
  id: number;
}

export interface SceneAgent {
  id: number;
  x: number;
  y: number;
  detoured: boolean;
}

export interface SceneEdge {
  from: number;
  to: number;
  waypoints: number;
  congested: boolean;
  closed: boolean;
  agents: SceneAgent[];
}

export interface SceneOverlay {
  uatm: number;
  segments: { from: number; to: number; lo: number; hi: number }[];
}

export interface NetworkScene {
  width: number;
  height: number;
  nodes: SceneNode[];
  edges: SceneEdge[];
  overlays: SceneOverlay[];
}

const SIZE = 640;
const RADIUS = 250;

export function layoutNodes(network: NetworkDoc): Map<number, ScenePoint> {
  const nodes = [...network.vertiports].sort((a, b) => a - b);
  const points = new Map<number, ScenePoint>();
  nodes.forEach((id, i) => {
    const angle = (2 * Math.PI * i) / nodes.length - Math.PI / 2;
    points.set(id, {
      x: Math.round(SIZE / 2 + RADIUS * Math.cos(angle)),
      y: Math.round(SIZE / 2 + RADIUS * Math.sin(angle)),
    });
  });
  return points;
}

function along(a: ScenePoint, b: ScenePoint, fraction: number): ScenePoint {
  return {
    x: Math.round(a.x + (b.x - a.x) * fraction),
    y: Math.round(a.y + (b.y - a.y) * fraction),
  };
}

export function buildNetworkScene(view: ViewModel): NetworkScene {
  const network = view.network;
  const points = layoutNodes(network);
  const nodes: SceneNode[] = [...points.entries()].map(([id, p]) => ({ id, ...p }));

  const agentsByEdge = new Map<string, AgentView[]>();
  for (const agent of view.agents.values()) {
    if (!agent.corridor || agent.arrived) continue;
    const key = agent.corridor.join(",");
    const list = agentsByEdge.get(key) ?? [];
    list.push(agent);
    agentsByEdge.set(key, list);
  }

  const isMarked = (list: Edge[], edge: Edge) =>
    list.some((c) => sameEdge(c, edge) || sameEdge(c, [edge[1], edge[0]]));

  const edges: SceneEdge[] = network.corridors.map((c) => {
    const a = points.get(c.from)!;
    const b = points.get(c.to)!;
    const edge: Edge = [c.from, c.to];
    const occupants = [
      ...(agentsByEdge.get(`${c.from},${c.to}`) ?? []),
      ...(agentsByEdge.get(`${c.to},${c.from}`) ?? []).map((agent) => ({
        ...agent,
        // reverse traversal: mirror the waypoint onto the declared direction
        waypoint: c.waypoints + 1 - (agent.waypoint ?? 1),
      })),
    ];
    const agents: SceneAgent[] = occupants
      .sort((x, y) => x.id - y.id)
      .map((agent) => {
        const p = along(a, b, (agent.waypoint ?? 1) / (c.waypoints + 1));
        return { id: agent.id, x: p.x, y: p.y, detoured: Boolean(agent.detoured) };
      });
    return {
      from: c.from,
      to: c.to,
      waypoints: c.waypoints,
      congested: isMarked(view.congested, edge),
      closed: isMarked(view.closed, edge),
      agents,
    };
  });

  const overlayMap = new Map<number, SceneOverlay>();
  for (const seg of network.coverage) {
    const overlay = overlayMap.get(seg.uatm) ?? { uatm: seg.uatm, segments: [] };
    overlay.segments.push({ from: seg.from, to: seg.to, lo: seg.lo, hi: seg.hi });
    overlayMap.set(seg.uatm, overlay);
  }
  const overlays = [...overlayMap.values()].sort((a, b) => a.uatm - b.uatm);

  return { width: SIZE, height: SIZE, nodes, edges, overlays };
}

export function renderSvg(scene: NetworkScene): string {
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${scene.width} ${scene.height}">`,
  ];
  const point = (id: number) => scene.nodes.find((n) => n.id === id)!;

  for (const overlay of scene.overlays) {
    for (const seg of overlay.segments) {
      const a = point(seg.from);
      const b = point(seg.to);
      const n = scene.edges.find((e) => e.from === seg.from && e.to === seg.to)!;
      const lo = along(a, b, seg.lo / (n.waypoints + 1));
      const hi = along(a, b, seg.hi / (n.waypoints + 1));
      parts.push(
        `<line class="coverage coverage-uatm-${overlay.uatm}" ` +
          `x1="${lo.x}" y1="${lo.y}" x2="${hi.x}" y2="${hi.y}"/>`,
      );
    }
  }
  for (const edge of scene.edges) {
    const a = point(edge.from);
    const b = point(edge.to);
    const classes = ["corridor"];
    if (edge.congested) classes.push("congested");
    if (edge.closed) classes.push("closed");
    parts.push(
      `<line class="${classes.join(" ")}" data-edge="${edge.from},${edge.to}" ` +
        `x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}"/>`,
    );
    for (const agent of edge.agents) {
      const classes = agent.detoured ? "agent detoured" : "agent";
      parts.push(
        `<circle class="${classes}" data-agent="${agent.id}" ` +
          `cx="${agent.x}" cy="${agent.y}" r="6"/>`,
      );
      parts.push(
        `<text class="agent-label" x="${agent.x + 8}" y="${agent.y - 8}">${agent.id}</text>`,
      );
    }
  }
  for (const node of scene.nodes) {
    parts.push(
      `<circle class="vertiport" data-vertiport="${node.id}" ` +
        `cx="${node.x}" cy="${node.y}" r="14"/>`,
    );
    parts.push(
      `<text class="vertiport-label" x="${node.x}" y="${node.y + 4}">${node.id}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("\n");
}
