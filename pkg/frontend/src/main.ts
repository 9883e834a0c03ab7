// Browser entry point: adapts the native WebSocket to the injectable
// socket shape the bridge expects, then mounts the dashboard.

import type { WebSocketLike, WsFactory } from "./bridge.js";
import { Dashboard } from "./state.js";
import { Ui } from "./ui.js";

const browserWs: WsFactory = (url) => {
  const raw = new WebSocket(url);
  const like: WebSocketLike = {
    send: (data) => raw.send(data),
    close: () => raw.close(),
    onopen: null,
    onmessage: null,
    onclose: null,
    onerror: null,
  };
  raw.onopen = () => like.onopen?.();
  raw.onmessage = (ev) => like.onmessage?.({ data: ev.data });
  raw.onclose = () => like.onclose?.();
  raw.onerror = () => like.onerror?.();
  return like;
};

function boot(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");
  let ui: Ui | null = null;
  const dash = new Dashboard({
    wsFactory: browserWs,
    onChange: () => ui?.render(),
    log: (message) => console.debug("[dashboard]", message),
  });
  ui = new Ui(root, dash, localStorage);
}

boot();
