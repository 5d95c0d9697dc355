// WebSocket session client: newline-terminated JSON lines, reconnect with
// capped backoff, status surfaced through a callback (never silent).

import { decodeServerMessage, encodeClientMessage } from './protocol.js';
import type { ClientMessage, ServerMessage } from './protocol.js';
import type { ConnectionStatus } from './viewstate.js';

export interface ConnectionCallbacks {
  onMessage: (msg: ServerMessage) => void;
  onStatus: (status: ConnectionStatus) => void;
}

const INITIAL_RETRY_MS = 500;
const MAX_RETRY_MS = 8000;

export class SessionConnection {
  private ws: WebSocket | null = null;
  private closed = false;
  private retryMs = INITIAL_RETRY_MS;
  private retryTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly url: string,
    private readonly callbacks: ConnectionCallbacks,
  ) {}

  connect(): void {
    this.closed = false;
    this.open();
  }

  private open(): void {
    this.callbacks.onStatus('connecting');
    const ws = new WebSocket(this.url);
    this.ws = ws;

    ws.onopen = () => {
      this.retryMs = INITIAL_RETRY_MS;
      this.callbacks.onStatus('connected');
    };

    ws.onmessage = (ev: MessageEvent) => {
      const data = typeof ev.data === 'string' ? ev.data : '';
      for (const line of data.split('\n')) {
        const msg = decodeServerMessage(line);
        if (msg) this.callbacks.onMessage(msg);
      }
    };

    ws.onclose = () => {
      this.ws = null;
      if (this.closed) return;
      this.callbacks.onStatus('disconnected');
      this.retryTimer = setTimeout(() => this.open(), this.retryMs);
      this.retryMs = Math.min(this.retryMs * 2, MAX_RETRY_MS);
    };

    ws.onerror = () => {
      // onclose follows and owns the retry
    };
  }

  /** Send a control message; returns false (and keeps quiet on the wire)
   * when the session is down, so the caller can show a banner. */
  send(msg: ClientMessage): boolean {
    if (!this.ws || this.ws.readyState !== WebSocket.OPEN) return false;
    this.ws.send(encodeClientMessage(msg));
    return true;
  }

  close(): void {
    this.closed = true;
    if (this.retryTimer) clearTimeout(this.retryTimer);
    this.ws?.close();
  }
}

export function sessionUrl(host: string, port: number | string): string {
  return `ws://${host}:${port}/session`;
}
