// WebSocket bridge client. The server speaks two message shapes over
// one socket: hex text for binary frames, JSON objects for ops
// (auth/status/history). See docs/bridge.md in the repository root.

import {
  bytesToHex,
  decodeFrame,
  encodeFrame,
  hexToBytes,
  isHexMessage,
  type Frame,
} from "./codec.js";

export interface WebSocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type WsFactory = (url: string) => WebSocketLike;

export interface BridgeHandlers {
  onOpen(): void;
  onFrame(frame: Frame): void;
  onOp(message: Record<string, unknown>): void;
  onClose(): void;
  /** Malformed bridge traffic: logged by the caller, view unchanged. */
  onGarbage(reason: string): void;
}

export class Bridge {
  private ws: WebSocketLike;

  constructor(url: string, factory: WsFactory, private handlers: BridgeHandlers) {
    this.ws = factory(url);
    this.ws.onopen = () => handlers.onOpen();
    this.ws.onclose = () => handlers.onClose();
    this.ws.onerror = () => handlers.onClose();
    this.ws.onmessage = (ev) => this.dispatch(ev.data);
  }

  private dispatch(data: unknown): void {
    if (typeof data !== "string") {
      this.handlers.onGarbage("non-text message");
      return;
    }
    if (isHexMessage(data)) {
      let frame: Frame;
      try {
        frame = decodeFrame(hexToBytes(data));
      } catch (err) {
        this.handlers.onGarbage(`bad frame ${data}: ${String(err)}`);
        return;
      }
      this.handlers.onFrame(frame);
      return;
    }
    let parsed: unknown;
    try {
      parsed = JSON.parse(data);
    } catch {
      this.handlers.onGarbage(`not hex, not JSON: ${data.slice(0, 40)}`);
      return;
    }
    if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
      this.handlers.onGarbage("JSON message is not an object");
      return;
    }
    this.handlers.onOp(parsed as Record<string, unknown>);
  }

  sendFrame(frame: Frame): string {
    const hex = bytesToHex(encodeFrame(frame));
    this.ws.send(hex);
    return hex;
  }

  sendOp(op: Record<string, unknown>): void {
    this.ws.send(JSON.stringify(op));
  }

  close(): void {
    this.ws.close();
  }
}
