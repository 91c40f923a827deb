/** Thin client over the gateway's documented HTTP surface. */

import { EventLine, SessionStateDoc, parseEventLine } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class GatewayClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(this.base + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        detail = ((await response.json()) as { detail?: string }).detail ?? detail;
      } catch {
        // keep the status text
      }
      throw new Error(detail);
    }
    return response;
  }

  async createSession(scenario: unknown): Promise<string> {
    const response = await this.request("/api/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(scenario),
    });
    return ((await response.json()) as { session: string }).session;
  }

  async state(session: string): Promise<SessionStateDoc> {
    const response = await this.request(`/api/sessions/${session}/state`);
    return (await response.json()) as SessionStateDoc;
  }

  async command(
    session: string,
    action: Record<string, unknown>,
  ): Promise<{ result: unknown; events: EventLine[] }> {
    const response = await this.request(`/api/sessions/${session}/commands`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(action),
    });
    const body = (await response.json()) as { result: unknown; events: string[] };
    return { result: body.result, events: body.events.map(parseEventLine) };
  }

  async trace(session: string): Promise<EventLine[]> {
    const response = await this.request(`/api/sessions/${session}/trace`);
    const text = await response.text();
    return text
      .split("\n")
      .filter((line) => line.length > 0)
      .map(parseEventLine);
  }

  eventsUrl(session: string, location: { host: string; protocol: string }): string {
    const scheme = location.protocol === "https:" ? "wss" : "ws";
    return `${scheme}://${location.host}/api/sessions/${session}/events`;
  }
}
