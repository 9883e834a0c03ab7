/**
 * Scripted end-to-end exercises of the mounted dashboard: manual gear
 * steering with echo-gated badges, setpoint submission with an
 * acknowledgment-gated mode chip, and the staleness banner.
 *
 * @vitest-environment jsdom
 */

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import {
  bytesToHex,
  encodeFrame,
  zeroBank,
  type Bank,
  type Frame,
} from "../src/codec.js";
import { Dashboard } from "../src/state.js";
import { Ui } from "../src/ui.js";
import { fakeWs, type FakeSocket } from "./fakes.js";

const PUSH_PERIOD_MS = 1000;

// Bank the simulated server reports before any steering: LED 1,
// heating 2, drip on, everything else off.
const BASE_BANK: Bank = {
  ...zeroBank(),
  led_gear: 1,
  heating_gear: 2,
  cooling_gear: 1,
  drip_switch: 1,
};

function pushHex(bank: Bank): string {
  const frame: Frame = {
    kind: "AppData",
    bank,
    temperature: 24,
    humidity: 61,
    light: 10000,
    soil: 1,
  };
  return bytesToHex(encodeFrame(frame));
}

function statusReply(mode: string): string {
  return JSON.stringify({
    op: "status",
    ok: true,
    mode,
    setpoints: { temperature: 25, humidity: 60, light: 10000 },
  });
}

interface Mounted {
  dash: Dashboard;
  ui: Ui;
  socket: FakeSocket;
  el: <T extends HTMLElement>(id: string) => T;
  input: (id: string, value: string) => void;
}

function mount(): Mounted {
  const { factory, sockets } = fakeWs();
  document.body.innerHTML = '<div id="app"></div>';
  const root = document.getElementById("app")!;
  let ui: Ui | null = null;
  const dash = new Dashboard({
    wsFactory: factory,
    onChange: () => ui?.render(),
    pushPeriodMs: PUSH_PERIOD_MS,
    statusPollMs: 600_000,
    debounceMs: 300,
  });
  ui = new Ui(root, dash, window.localStorage);

  const el = <T extends HTMLElement>(id: string): T => {
    const found = document.getElementById(id);
    if (!found) throw new Error(`missing #${id}`);
    return found as T;
  };
  const input = (id: string, value: string): void => {
    const box = el<HTMLInputElement>(id);
    box.value = value;
    box.dispatchEvent(new Event("input"));
  };

  el<HTMLInputElement>("connect-host").value = "127.0.0.1";
  el<HTMLInputElement>("connect-port").value = "8090";
  el<HTMLInputElement>("connect-username").value = "operator";
  el<HTMLInputElement>("connect-password").value = "operator";
  el<HTMLButtonElement>("connect-submit").click();

  const socket = sockets[0]!;
  return { dash, ui, socket, el, input };
}

/** Drive the preamble to a live session with one echoed push. */
function goLive(m: Mounted): void {
  m.socket.open();
  const auth = JSON.parse(m.socket.drain()[0]!) as Record<string, unknown>;
  expect(auth).toMatchObject({ op: "auth", username: "operator" });
  m.socket.receive(JSON.stringify({ op: "auth", ok: true, token: "tok" }));
  m.socket.receive(statusReply("manual"));
  m.socket.receive(pushHex(BASE_BANK));
  m.socket.drain();
}

function badge(m: Mounted, field: string): string {
  const value = m.el(`badge-${field}`).querySelector(".badge-value");
  return value?.textContent ?? "";
}

beforeEach(() => {
  vi.useFakeTimers();
  window.localStorage.clear();
});

afterEach(() => {
  vi.useRealTimers();
});

describe("connection flow", () => {
  it("authenticates over the socket and goes live", () => {
    const m = mount();
    expect(m.socket.url).toBe("ws://127.0.0.1:8090/ws");
    expect(m.dash.phase).toBe("connecting");
    m.socket.open();
    expect(m.dash.phase).toBe("authenticating");
    const sent = m.socket.drain();
    expect(JSON.parse(sent[0]!)).toEqual({
      op: "auth",
      username: "operator",
      password: "operator",
    });
    m.socket.receive(JSON.stringify({ op: "auth", ok: true, token: "tok" }));
    expect(m.dash.phase).toBe("live");
    expect(m.el("phase-label").textContent).toBe("live");
    // A status request follows immediately so the chip can settle.
    expect(m.socket.drain().map((s) => JSON.parse(s))).toEqual([
      { op: "status" },
    ]);
  });

  it("surfaces a rejected login and closes the socket", () => {
    const m = mount();
    m.socket.open();
    m.socket.drain();
    m.socket.receive(
      JSON.stringify({ op: "auth", ok: false, error: "InvalidCredentials" }),
    );
    expect(m.dash.phase).toBe("failed");
    expect(m.el("connect-error").hidden).toBe(false);
    expect(m.el("connect-error").textContent).toBe("InvalidCredentials");
    expect(m.socket.closed).toBe(true);
  });

  it("renders pushed readings into the monitor tiles", () => {
    const m = mount();
    goLive(m);
    expect(m.el("reading-temperature").textContent).toBe("24");
    expect(m.el("reading-humidity").textContent).toBe("61");
    expect(m.el("reading-light").textContent).toBe("10000");
    expect(m.el("reading-soil").textContent).toBe("wet");
    expect(badge(m, "led_gear")).toBe("1/3");
    expect(badge(m, "heating_gear")).toBe("2/5");
    expect(badge(m, "drip_switch")).toBe("on");
    expect(badge(m, "humidifier_switch")).toBe("off");
  });
});

describe("manual steering", () => {
  it("keeps steering controls disabled until the session is live", () => {
    const m = mount();
    expect(m.el<HTMLInputElement>("slider-cooling_gear").disabled).toBe(true);
    expect(m.el<HTMLButtonElement>("auto-apply").disabled).toBe(true);
    goLive(m);
    expect(m.el<HTMLInputElement>("slider-cooling_gear").disabled).toBe(false);
    expect(m.el<HTMLButtonElement>("auto-apply").disabled).toBe(false);
  });

  it("debounces a cooling-slider move and updates the badge only on echo", () => {
    const m = mount();
    goLive(m);
    expect(badge(m, "cooling_gear")).toBe("1/5");

    m.input("slider-cooling_gear", "4");
    // Nothing leaves before the debounce window closes.
    vi.advanceTimersByTime(299);
    expect(m.socket.sent).toEqual([]);

    vi.advanceTimersByTime(1);
    const sent = m.socket.drain();
    // One full-bank frame built from the last echoed bank, cooling
    // switched to 4, then a status refresh.
    expect(sent[0]).toBe("A50F3001310232043300340135000D");
    expect(JSON.parse(sent[1]!)).toEqual({ op: "status" });
    expect(sent).toHaveLength(2);

    // Still the echoed value: the badge must not move optimistically.
    expect(badge(m, "cooling_gear")).toBe("1/5");

    // Server applies the instruction and echoes it in the next push.
    m.socket.receive(pushHex({ ...BASE_BANK, cooling_gear: 4 }));
    expect(badge(m, "cooling_gear")).toBe("4/5");
  });

  it("coalesces a rapid wiggle into one frame carrying the final value", () => {
    const m = mount();
    goLive(m);
    m.input("slider-cooling_gear", "2");
    vi.advanceTimersByTime(100);
    m.input("slider-cooling_gear", "3");
    vi.advanceTimersByTime(100);
    m.input("slider-cooling_gear", "4");
    vi.advanceTimersByTime(300);
    const frames = m.socket.drain().filter((s) => !s.startsWith("{"));
    expect(frames).toEqual(["A50F3001310232043300340135000D"]);
  });

  it("sends a toggle flip as part of the same full-bank frame", () => {
    const m = mount();
    goLive(m);
    const toggle = m.el<HTMLInputElement>("toggle-humidifier_switch");
    toggle.checked = true;
    toggle.dispatchEvent(new Event("change"));
    vi.advanceTimersByTime(300);
    const frames = m.socket.drain().filter((s) => !s.startsWith("{"));
    expect(frames).toEqual(["A50F3001310232013300340135010D"]);
  });
});

describe("automatic mode", () => {
  it("submits setpoints and flips the chip only on acknowledgment", () => {
    const m = mount();
    goLive(m);
    expect(m.el("mode-chip").textContent).toBe("manual");

    m.input("auto-temperature", "25");
    m.input("auto-humidity", "60");
    m.input("auto-light", "10000");
    m.el<HTMLButtonElement>("auto-apply").click();

    const sent = m.socket.drain();
    expect(sent[0]).toBe("A5094019413C42640D");
    expect(JSON.parse(sent[1]!)).toEqual({ op: "status" });

    // No acknowledgment yet: the chip must not flip.
    expect(m.el("mode-chip").textContent).toBe("manual");

    m.socket.receive(statusReply("automatic"));
    expect(m.el("mode-chip").textContent).toBe("automatic");
  });

  it("rejects out-of-range setpoints client-side without sending", () => {
    const m = mount();
    goLive(m);
    m.input("auto-temperature", "90");
    m.el<HTMLButtonElement>("auto-apply").click();
    expect(m.socket.sent).toEqual([]);
    const box = m.el("auto-error");
    expect(box.hidden).toBe(false);
    expect(box.textContent).toContain("temperature");
    expect(m.el("mode-chip").textContent).toBe("manual");
  });
});

describe("staleness", () => {
  it("raises the banner after three silent push periods and clears on data", () => {
    const m = mount();
    goLive(m);
    expect(m.el("stale-banner").hidden).toBe(true);

    // The period that contained the last push is not a miss, so the
    // third silent period completes one tick later.
    vi.advanceTimersByTime(3 * PUSH_PERIOD_MS);
    expect(m.dash.missedPushes).toBe(2);
    expect(m.el("stale-banner").hidden).toBe(true);
    vi.advanceTimersByTime(PUSH_PERIOD_MS);
    expect(m.dash.missedPushes).toBe(3);
    expect(m.el("stale-banner").hidden).toBe(false);

    m.socket.receive(pushHex(BASE_BANK));
    expect(m.el("stale-banner").hidden).toBe(true);
  });
});

describe("connection profile", () => {
  it("persists credentials only when asked to remember them", () => {
    const m = mount();
    expect(window.localStorage.length).toBe(0);

    m.el<HTMLInputElement>("connect-remember").checked = true;
    m.el<HTMLButtonElement>("connect-submit").click();
    const stored = window.localStorage.getItem("greenhouse-dashboard-profile");
    expect(stored).not.toBeNull();
    expect(JSON.parse(stored!)).toMatchObject({
      host: "127.0.0.1",
      port: 8090,
      username: "operator",
      remember: true,
    });

    m.el<HTMLInputElement>("connect-remember").checked = false;
    m.el<HTMLButtonElement>("connect-submit").click();
    expect(
      window.localStorage.getItem("greenhouse-dashboard-profile"),
    ).toBeNull();
  });
});
