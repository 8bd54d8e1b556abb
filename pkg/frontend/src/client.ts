// WebSocket client for the /play session. Messages sent while offline are
// queued and flushed on reconnect; the UI shows an offline indicator.

import { ClientMessage, ServerMessage, parseServerMessage } from "./protocol.js";

export interface ClientHandlers {
  onMessage: (msg: ServerMessage) => void;
  onStatus?: (connected: boolean) => void;
}

export class PlayClient {
  private ws: WebSocket | null = null;
  private queue: string[] = [];
  private reconnectAttempts = 0;
  private closed = false;

  constructor(
    private readonly url: string,
    private readonly handlers: ClientHandlers,
  ) {}

  connect(): void {
    this.closed = false;
    this.ws = new WebSocket(this.url);
    this.ws.onopen = () => {
      this.reconnectAttempts = 0;
      this.handlers.onStatus?.(true);
      for (const raw of this.queue.splice(0)) {
        this.ws?.send(raw);
      }
    };
    this.ws.onmessage = (ev) => {
      const msg = parseServerMessage(String(ev.data));
      if (msg) this.handlers.onMessage(msg);
    };
    this.ws.onclose = () => {
      this.handlers.onStatus?.(false);
      if (!this.closed) this.scheduleReconnect();
    };
    this.ws.onerror = () => {
      // onclose follows; nothing to do here
    };
  }

  private scheduleReconnect(): void {
    const delay = Math.min(500 * 2 ** this.reconnectAttempts, 10_000);
    this.reconnectAttempts += 1;
    setTimeout(() => {
      if (!this.closed) this.connect();
    }, delay);
  }

  get connected(): boolean {
    return this.ws !== null && this.ws.readyState === WebSocket.OPEN;
  }

  send(msg: ClientMessage): void {
    const raw = JSON.stringify(msg);
    if (this.connected) {
      this.ws!.send(raw);
    } else {
      this.queue.push(raw); // flushed when the socket comes back
    }
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }
}
