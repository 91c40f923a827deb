/** Browser wiring: read-only live view plus the closure dialog and the step
 * button. All state shown comes from the server's state document and the
 * event stream; commands go through the documented POST endpoint. */

import { GatewayClient } from "./api.js";
import {
  buildClosureCommand,
  phasesFromEvents,
  validateViaRoute,
} from "./closure_dialog.js";
import { EventFeed } from "./events.js";
import { buildNetworkScene, renderSvg } from "./network_view.js";
import { buildTracePanel, instancesInTrace, renderTracePanel } from "./trace_panel.js";
import { EventLine } from "./types.js";
import { ViewModel, applyEvent, initialViewModel } from "./view_model.js";

const client = new GatewayClient();

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found as T;
}

let view: ViewModel | null = null;
let trace: EventLine[] = [];
let feed: EventFeed | null = null;

function redraw(): void {
  if (!view) return;
  el("map").innerHTML = renderSvg(buildNetworkScene(view));
  el("status").textContent =
    `session ${view.session} — step ${view.step}/${view.horizon}, ` +
    `${[...view.agents.values()].filter((a) => a.corridor).length} in flight`;
  const instances = instancesInTrace(trace);
  const panels = instances.map((i) => {
    const panel = renderTracePanel(buildTracePanel(trace, i));
    const phases = phasesFromEvents(trace, i).join(" -> ");
    return `${panel}\nphases: ${phases}`;
  });
  el("trace-panel").textContent =
    panels.join("\n\n") || "no protocol instances yet";
  el("feed").textContent = trace
    .slice(-12)
    .map((line) => JSON.stringify(line))
    .join("\n");
}

async function connect(session: string): Promise<void> {
  feed?.stop();
  const state = await client.state(session);
  view = initialViewModel(state);
  trace = [];
  const socket = new WebSocket(client.eventsUrl(session, window.location));
  feed = new EventFeed(
    socket as unknown as import("./events.js").SocketLike,
    (line) => {
      trace.push(line);
      if (view) applyEvent(view, line);
      redraw();
    },
    () => {
      el("status").textContent = "disconnected — reload to reconnect";
    },
  );
  redraw();
}

async function submitClosure(): Promise<void> {
  if (!view) return;
  const closedFrom = Number(el<HTMLInputElement>("closed-from").value);
  const closedTo = Number(el<HTMLInputElement>("closed-to").value);
  const via = el<HTMLInputElement>("via").value
    .split(",")
    .map((v) => Number(v.trim()));
  const atStep = view.step + 1;
  const problems = validateViaRoute(view.network, [closedFrom, closedTo], via);
  if (problems.length) {
    el("dialog-errors").textContent = problems.join("; ");
    return; // the dialog blocks submission client-side
  }
  el("dialog-errors").textContent = "";
  const command = buildClosureCommand([closedFrom, closedTo], via, atStep);
  try {
    await client.command(view.session, command as unknown as Record<string, unknown>);
  } catch (error) {
    el("dialog-errors").textContent = String(error); // server rejection, verbatim
  }
}

async function step(): Promise<void> {
  if (!view) return;
  try {
    await client.command(view.session, { action: "step" });
  } catch (error) {
    el("dialog-errors").textContent = String(error);
  }
}

export function boot(): void {
  el("connect").addEventListener("click", () => {
    void connect(el<HTMLInputElement>("session").value.trim());
  });
  el("close-corridor").addEventListener("click", () => void submitClosure());
  el("step").addEventListener("click", () => void step());
  void connect(el<HTMLInputElement>("session").value.trim());
}

if (typeof document !== "undefined") {
  window.addEventListener("DOMContentLoaded", boot);
}
