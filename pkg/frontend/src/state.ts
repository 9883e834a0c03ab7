// Dashboard state machine. Keeps every rule the UI must obey in one
// testable place:
//  - badges and tiles render only values decoded from pushed frames,
//    never local slider positions (no optimistic state);
//  - the mode chip changes only on a server status acknowledgment;
//  - slider moves are debounced into a single full-bank frame;
//  - a staleness flag trips after three missed push periods.

import { Bridge, type WsFactory } from "./bridge.js";
import {
  lightSetpointByte,
  zeroBank,
  type Bank,
  type BankField,
  type Frame,
  HUMIDITY_MAX,
  HUMIDITY_MIN,
  TEMP_MAX_C,
  TEMP_MIN_C,
} from "./codec.js";
import type { SeriesPoint } from "./history.js";

export const READING_VARIABLES = [
  "temperature",
  "humidity",
  "light",
  "soil",
] as const;

export interface ConnectionProfile {
  host: string;
  port: number;
  username: string;
  password: string;
  remember: boolean;
}

export const DEFAULT_PROFILE: ConnectionProfile = {
  host: "127.0.0.1",
  port: 8090,
  username: "operator",
  password: "",
  remember: false,
};

export type Phase = "idle" | "connecting" | "authenticating" | "live" | "failed";

export interface LiveView {
  bank: Bank;
  temperature: number;
  humidity: number;
  light: number;
  soil: number;
  at: number;
}

export interface Setpoints {
  temperature: number;
  humidity: number;
  light: number;
}

export interface DashboardOptions {
  wsFactory: WsFactory;
  onChange: () => void;
  log?: (message: string) => void;
  pushPeriodMs?: number;
  statusPollMs?: number;
  debounceMs?: number;
  now?: () => number;
}

export const STALE_AFTER_MISSED = 3;

type HistoryResolver = {
  resolve: (series: [number, number][]) => void;
  reject: (err: Error) => void;
};

export class Dashboard {
  phase: Phase = "idle";
  error: string | null = null;
  live: LiveView | null = null;
  mode: "manual" | "automatic" | "unknown" = "unknown";
  setpoints: Setpoints | null = null;
  missedPushes = 0;
  framesSent = 0;
  /** Rolling monitor sparklines, one short series per reading. */
  readonly sparks: Record<string, SeriesPoint[]> = {};

  private bridge: Bridge | null = null;
  private staged: Bank | null = null;
  private debounceHandle: ReturnType<typeof setTimeout> | null = null;
  private pushWatch: ReturnType<typeof setInterval> | null = null;
  private statusPoll: ReturnType<typeof setInterval> | null = null;
  private sawPush = false;
  private historyQueue: HistoryResolver[] = [];

  private readonly pushPeriodMs: number;
  private readonly statusPollMs: number;
  private readonly debounceMs: number;
  private readonly now: () => number;
  private readonly log: (message: string) => void;

  constructor(private opts: DashboardOptions) {
    this.pushPeriodMs = opts.pushPeriodMs ?? 5000;
    this.statusPollMs = opts.statusPollMs ?? 5000;
    this.debounceMs = opts.debounceMs ?? 300;
    this.now = opts.now ?? (() => Date.now());
    this.log = opts.log ?? (() => undefined);
  }

  get stale(): boolean {
    return this.live !== null && this.missedPushes >= STALE_AFTER_MISSED;
  }

  get connected(): boolean {
    return this.phase === "live";
  }

  // -- connection lifecycle --------------------------------------------------

  connect(profile: ConnectionProfile): void {
    this.disconnect();
    this.phase = "connecting";
    this.error = null;
    const url = `ws://${profile.host}:${profile.port}/ws`;
    this.bridge = new Bridge(url, this.opts.wsFactory, {
      onOpen: () => {
        this.phase = "authenticating";
        this.bridge?.sendOp({
          op: "auth",
          username: profile.username,
          password: profile.password,
        });
        this.changed();
      },
      onFrame: (frame) => this.onFrame(frame),
      onOp: (message) => this.onOp(message),
      onClose: () => {
        if (this.phase !== "idle" && this.phase !== "failed") {
          this.fail(this.error ?? "connection lost");
        }
      },
      onGarbage: (reason) => this.log(reason),
    });
    this.changed();
  }

  disconnect(): void {
    this.stopTimers();
    if (this.debounceHandle !== null) {
      clearTimeout(this.debounceHandle);
      this.debounceHandle = null;
    }
    this.staged = null;
    const bridge = this.bridge;
    this.bridge = null;
    const wasIdle = this.phase === "idle";
    // Settle state before closing: the socket's close callback may run
    // synchronously and must see this as a deliberate shutdown.
    this.phase = "idle";
    this.error = null;
    bridge?.close();
    this.flushHistoryQueue("disconnected");
    if (!wasIdle) this.changed();
  }

  private fail(message: string): void {
    this.stopTimers();
    this.phase = "failed";
    this.error = message;
    this.bridge = null;
    this.flushHistoryQueue(message);
    this.changed();
  }

  private startTimers(): void {
    this.stopTimers();
    this.sawPush = false;
    this.pushWatch = setInterval(() => {
      if (!this.sawPush) {
        this.missedPushes += 1;
        this.changed();
      }
      this.sawPush = false;
    }, this.pushPeriodMs);
    this.statusPoll = setInterval(() => {
      this.bridge?.sendOp({ op: "status" });
      this.refreshSparklines();
    }, this.statusPollMs);
  }

  /** Refill the monitor sparklines from short history queries; rides
   * the status poll so scripted tests stay deterministic. */
  refreshSparklines(buckets = 48): void {
    if (!this.connected) return;
    for (const variable of READING_VARIABLES) {
      this.queryHistory(variable, { buckets })
        .then((series) => {
          this.sparks[variable] = series;
          this.changed();
        })
        .catch(() => undefined);
    }
  }

  private stopTimers(): void {
    if (this.pushWatch !== null) clearInterval(this.pushWatch);
    if (this.statusPoll !== null) clearInterval(this.statusPoll);
    this.pushWatch = null;
    this.statusPoll = null;
  }

  // -- incoming traffic ------------------------------------------------------

  private onFrame(frame: Frame): void {
    if (frame.kind !== "AppData") {
      this.log(`unexpected frame kind ${frame.kind}`);
      return;
    }
    this.live = {
      bank: { ...frame.bank },
      temperature: frame.temperature,
      humidity: frame.humidity,
      light: frame.light,
      soil: frame.soil,
      at: this.now(),
    };
    this.missedPushes = 0;
    this.sawPush = true;
    this.changed();
  }

  private onOp(message: Record<string, unknown>): void {
    const op = message["op"];
    if (op === "auth") {
      if (message["ok"] === true) {
        this.phase = "live";
        this.startTimers();
        this.bridge?.sendOp({ op: "status" });
      } else {
        const reason = typeof message["error"] === "string"
          ? message["error"]
          : "authentication failed";
        const bridge = this.bridge;
        this.fail(reason);
        bridge?.close();
        return;
      }
      this.changed();
      return;
    }
    if (op === "status") {
      const mode = message["mode"];
      if (mode === "manual" || mode === "automatic") this.mode = mode;
      const sp = message["setpoints"];
      if (sp && typeof sp === "object") {
        const record = sp as Record<string, unknown>;
        this.setpoints = {
          temperature: Number(record["temperature"]),
          humidity: Number(record["humidity"]),
          light: Number(record["light"]),
        };
      }
      this.changed();
      return;
    }
    if (op === "history") {
      const pending = this.historyQueue.shift();
      if (!pending) return;
      if (message["ok"] === true && Array.isArray(message["series"])) {
        pending.resolve(message["series"] as [number, number][]);
      } else {
        pending.reject(new Error(String(message["error"] ?? "history failed")));
      }
      return;
    }
    this.log(`unhandled op ${String(op)}`);
  }

  // -- outgoing control ------------------------------------------------------

  /** Stage one slider move; the full bank goes out after the debounce
   * window closes. Rendering ignores the staged value entirely. */
  setManualGear(field: BankField, value: number): void {
    if (!this.connected || this.bridge === null) return;
    const base = this.staged ?? (this.live ? { ...this.live.bank } : zeroBank());
    this.staged = { ...base, [field]: value };
    if (this.debounceHandle !== null) clearTimeout(this.debounceHandle);
    this.debounceHandle = setTimeout(() => {
      this.debounceHandle = null;
      const bank = this.staged;
      this.staged = null;
      if (bank === null || this.bridge === null) return;
      this.bridge.sendFrame({ kind: "GearInstruction", bank });
      this.framesSent += 1;
      this.bridge.sendOp({ op: "status" });
    }, this.debounceMs);
  }

  /** Client-side validation mirrors the server's ranges; returns an
   * error message instead of sending when a value is out of range. */
  applyAuto(temperature: number, humidity: number, lightLux: number): string | null {
    if (!this.connected || this.bridge === null) return "not connected";
    if (!Number.isFinite(temperature) || temperature < TEMP_MIN_C || temperature > TEMP_MAX_C) {
      return `temperature setpoint outside ${TEMP_MIN_C}..${TEMP_MAX_C}`;
    }
    if (!Number.isFinite(humidity) || humidity < HUMIDITY_MIN || humidity > HUMIDITY_MAX) {
      return `humidity setpoint outside ${HUMIDITY_MIN}..${HUMIDITY_MAX}`;
    }
    if (!Number.isFinite(lightLux) || lightLux < 0 || lightLux > 25500) {
      return "light setpoint outside 0..25500";
    }
    this.bridge.sendFrame({
      kind: "AppAutoInstruction",
      temperature: Math.round(temperature),
      humidity: Math.round(humidity),
      light_hlux: lightSetpointByte(lightLux),
    });
    this.framesSent += 1;
    this.bridge.sendOp({ op: "status" });
    return null;
  }

  queryHistory(
    variable: string,
    options: { start?: number; end?: number; buckets?: number } = {},
  ): Promise<[number, number][]> {
    if (!this.connected || this.bridge === null) {
      return Promise.reject(new Error("not connected"));
    }
    const bridge = this.bridge;
    return new Promise((resolve, reject) => {
      this.historyQueue.push({ resolve, reject });
      bridge.sendOp({ op: "history", variable, ...options });
    });
  }

  private flushHistoryQueue(reason: string): void {
    for (const pending of this.historyQueue.splice(0)) {
      pending.reject(new Error(reason));
    }
  }

  private changed(): void {
    this.opts.onChange();
  }
}

// -- profile persistence -----------------------------------------------------

const PROFILE_KEY = "greenhouse-dashboard-profile";

export function loadProfile(storage: Pick<Storage, "getItem">): ConnectionProfile {
  try {
    const raw = storage.getItem(PROFILE_KEY);
    if (!raw) return { ...DEFAULT_PROFILE };
    const parsed = JSON.parse(raw) as Partial<ConnectionProfile>;
    return {
      ...DEFAULT_PROFILE,
      ...parsed,
      remember: parsed.remember === true,
    };
  } catch {
    return { ...DEFAULT_PROFILE };
  }
}

export function saveProfile(
  storage: Pick<Storage, "setItem" | "removeItem">,
  profile: ConnectionProfile,
): void {
  try {
    if (!profile.remember) {
      storage.removeItem(PROFILE_KEY);
      return;
    }
    storage.setItem(PROFILE_KEY, JSON.stringify(profile));
  } catch {
    // Storage may be unavailable (private mode); connecting still works.
  }
}
