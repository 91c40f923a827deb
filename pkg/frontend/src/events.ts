/** Event-stream consumer: one socket per view, events applied in arrival
 * order. The stream replays history first, so a reconnect rebuilds the same
 * view the trace describes. */

import { EventLine, parseEventLine } from "./types.js";

export interface SocketLike {
  onmessage: ((event: { data: string }) => void) | null;
  onclose: ((event: unknown) => void) | null;
  close(): void;
}

export class EventFeed {
  private seen = 0;

  constructor(
    private readonly socket: SocketLike,
    private readonly onEvent: (line: EventLine) => void,
    private readonly onDisconnect: () => void = () => {},
  ) {
    socket.onmessage = (message) => {
      this.seen += 1;
      this.onEvent(parseEventLine(message.data));
    };
    socket.onclose = () => this.onDisconnect();
  }

  get received(): number {
    return this.seen;
  }

  stop(): void {
    this.socket.close();
  }
}
