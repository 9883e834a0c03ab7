// Scriptable stand-in for the browser WebSocket, driven by tests.

import type { WebSocketLike, WsFactory } from "../src/bridge.js";

export class FakeSocket implements WebSocketLike {
  sent: string[] = [];
  closed = false;
  onopen: ((ev?: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: ((ev?: unknown) => void) | null = null;
  onerror: ((ev?: unknown) => void) | null = null;

  constructor(public url: string) {}

  send(data: string): void {
    if (this.closed) throw new Error("send on closed socket");
    this.sent.push(data);
  }

  close(): void {
    if (this.closed) return;
    this.closed = true;
    this.onclose?.();
  }

  // -- test-side controls ----------------------------------------------------

  /** Simulate the server accepting the connection. */
  open(): void {
    this.onopen?.();
  }

  /** Simulate an inbound message. */
  receive(data: unknown): void {
    this.onmessage?.({ data });
  }

  /** Simulate a transport error. */
  error(): void {
    this.onerror?.();
  }

  /** Frames/ops sent since the last call. */
  drain(): string[] {
    return this.sent.splice(0);
  }
}

export function fakeWs(): { factory: WsFactory; sockets: FakeSocket[] } {
  const sockets: FakeSocket[] = [];
  const factory: WsFactory = (url) => {
    const socket = new FakeSocket(url);
    sockets.push(socket);
    return socket;
  };
  return { factory, sockets };
}
