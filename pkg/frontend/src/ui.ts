// DOM layer. Builds the tab shell once, then projects Dashboard state
// into it on every change. Readings and badges are filled exclusively
// from the state's live view, so a slider drag never shows up in a
// badge until the server echoes it back in a push.

import { ACTUATOR_TABLE, type Bank, type BankField } from "./codec.js";
import { polylinePoints, seriesSummary, type SeriesPoint } from "./history.js";
import {
  loadProfile,
  saveProfile,
  STALE_AFTER_MISSED,
  type ConnectionProfile,
  type Dashboard,
} from "./state.js";

const TABS = ["connect", "monitor", "adjust", "history"] as const;
type Tab = (typeof TABS)[number];

const READINGS = [
  ["temperature", "Temperature", "°C"],
  ["humidity", "Humidity", "%RH"],
  ["light", "Light", "lx"],
  ["soil", "Soil", ""],
] as const;

const CHART_W = 600;
const CHART_H = 160;
const SPARK_W = 120;
const SPARK_H = 24;

export class Ui {
  private active: Tab = "connect";
  private lastPhase = "idle";
  private lastSeries: SeriesPoint[] = [];

  constructor(
    private root: HTMLElement,
    private dash: Dashboard,
    private storage: Storage,
  ) {
    root.innerHTML = this.shell();
    this.wireTabs();
    this.wireConnect();
    this.wireAdjust();
    this.wireHistory();
    this.render();
  }

  // -- static structure ------------------------------------------------------

  private shell(): string {
    const tabs = TABS.map(
      (t) =>
        `<button class="tab" id="tab-${t}" data-tab="${t}">` +
        `${t[0]?.toUpperCase()}${t.slice(1)}</button>`,
    ).join("");
    const readings = READINGS.map(
      ([key, label, unit]) =>
        `<div class="tile" id="tile-${key}">` +
        `<div class="tile-label">${label}</div>` +
        `<div class="tile-value" id="reading-${key}">—</div>` +
        `<div class="tile-unit">${unit}</div>` +
        `<svg class="spark" viewBox="0 0 ${SPARK_W} ${SPARK_H}" ` +
        `width="${SPARK_W}" height="${SPARK_H}">` +
        `<polyline id="spark-${key}" fill="none" stroke="currentColor" ` +
        `stroke-width="1" points=""></polyline></svg></div>`,
    ).join("");
    const badges = ACTUATOR_TABLE.map(
      ([, field, name]) =>
        `<div class="badge" id="badge-${field}">` +
        `<span class="badge-name">${name}</span> ` +
        `<span class="badge-value">—</span></div>`,
    ).join("");
    const sliders = ACTUATOR_TABLE.filter(([, , , limit]) => limit > 1)
      .map(
        ([, field, name, limit]) =>
          `<label class="control">${name}` +
          `<input type="range" id="slider-${field}" min="0" max="${limit}" ` +
          `step="1" value="0">` +
          `<span class="control-value" id="slider-${field}-value">0</span>` +
          `</label>`,
      )
      .join("");
    const toggles = ACTUATOR_TABLE.filter(([, , , limit]) => limit === 1)
      .map(
        ([, field, name]) =>
          `<label class="control">${name}` +
          `<input type="checkbox" id="toggle-${field}"></label>`,
      )
      .join("");
    return `
<header>
  <h1>Greenhouse Dashboard</h1>
  <span id="mode-chip" class="chip">—</span>
  <span id="phase-label"></span>
</header>
<div id="stale-banner" hidden>
  No fresh data: more than ${STALE_AFTER_MISSED} push periods missed.
</div>
<nav>${tabs}</nav>
<section id="panel-connect" class="panel">
  <label>Host <input id="connect-host"></label>
  <label>Port <input id="connect-port" type="number" min="1" max="65535"></label>
  <label>Username <input id="connect-username"></label>
  <label>Password <input id="connect-password" type="password"></label>
  <label><input id="connect-remember" type="checkbox"> Remember on this browser</label>
  <button id="connect-submit">Connect</button>
  <button id="connect-disconnect">Disconnect</button>
  <div id="connect-error" class="error" hidden></div>
</section>
<section id="panel-monitor" class="panel" hidden>
  <div class="tiles">${readings}</div>
  <div class="badges">${badges}</div>
  <div id="monitor-updated"></div>
</section>
<section id="panel-adjust" class="panel" hidden>
  <fieldset>
    <legend>Manual gears</legend>
    ${sliders}
    ${toggles}
  </fieldset>
  <fieldset>
    <legend>Automatic setpoints</legend>
    <label>Temperature (°C) <input id="auto-temperature" type="number" value="25"></label>
    <label>Humidity (%RH) <input id="auto-humidity" type="number" value="60"></label>
    <label>Light (lx) <input id="auto-light" type="number" value="10000" step="100"></label>
    <button id="auto-apply">Apply setpoints</button>
    <div id="auto-error" class="error" hidden></div>
  </fieldset>
</section>
<section id="panel-history" class="panel" hidden>
  <label>Series
    <select id="history-variable">
      <option value="temperature">temperature</option>
      <option value="humidity">humidity</option>
      <option value="light">light</option>
      <option value="soil">soil</option>
    </select>
  </label>
  <label>Buckets <input id="history-buckets" type="number" value="200" min="1"></label>
  <button id="history-refresh">Refresh</button>
  <svg id="history-chart" viewBox="0 0 ${CHART_W} ${CHART_H}"
       width="${CHART_W}" height="${CHART_H}">
    <polyline id="history-line" fill="none" stroke="currentColor"
              stroke-width="1.5" points=""></polyline>
  </svg>
  <div id="history-summary"></div>
  <div id="history-error" class="error" hidden></div>
</section>`;
  }

  // -- wiring ----------------------------------------------------------------

  private wireTabs(): void {
    for (const tab of TABS) {
      this.el<HTMLButtonElement>(`tab-${tab}`).addEventListener("click", () => {
        this.active = tab;
        this.render();
      });
    }
  }

  private wireConnect(): void {
    const profile = loadProfile(this.storage);
    this.el<HTMLInputElement>("connect-host").value = profile.host;
    this.el<HTMLInputElement>("connect-port").value = String(profile.port);
    this.el<HTMLInputElement>("connect-username").value = profile.username;
    this.el<HTMLInputElement>("connect-password").value = profile.password;
    this.el<HTMLInputElement>("connect-remember").checked = profile.remember;

    this.el<HTMLButtonElement>("connect-submit").addEventListener("click", () => {
      const next: ConnectionProfile = {
        host: this.el<HTMLInputElement>("connect-host").value || "127.0.0.1",
        port: Number(this.el<HTMLInputElement>("connect-port").value) || 8090,
        username: this.el<HTMLInputElement>("connect-username").value,
        password: this.el<HTMLInputElement>("connect-password").value,
        remember: this.el<HTMLInputElement>("connect-remember").checked,
      };
      saveProfile(this.storage, next);
      this.dash.connect(next);
      this.active = "monitor";
      this.render();
    });
    this.el<HTMLButtonElement>("connect-disconnect").addEventListener(
      "click",
      () => this.dash.disconnect(),
    );
  }

  private wireAdjust(): void {
    for (const [, field, , limit] of ACTUATOR_TABLE) {
      if (limit > 1) {
        const slider = this.el<HTMLInputElement>(`slider-${field}`);
        slider.addEventListener("input", () => {
          this.el(`slider-${field}-value`).textContent = slider.value;
          this.dash.setManualGear(field, Number(slider.value));
        });
      } else {
        const toggle = this.el<HTMLInputElement>(`toggle-${field}`);
        toggle.addEventListener("change", () => {
          this.dash.setManualGear(field, toggle.checked ? 1 : 0);
        });
      }
    }
    this.el<HTMLButtonElement>("auto-apply").addEventListener("click", () => {
      const err = this.dash.applyAuto(
        Number(this.el<HTMLInputElement>("auto-temperature").value),
        Number(this.el<HTMLInputElement>("auto-humidity").value),
        Number(this.el<HTMLInputElement>("auto-light").value),
      );
      const box = this.el("auto-error");
      box.hidden = err === null;
      box.textContent = err ?? "";
    });
  }

  private wireHistory(): void {
    this.el<HTMLButtonElement>("history-refresh").addEventListener("click", () => {
      const variable = this.el<HTMLSelectElement>("history-variable").value;
      const buckets = Number(this.el<HTMLInputElement>("history-buckets").value) || 200;
      this.dash
        .queryHistory(variable, { buckets })
        .then((series) => this.showSeries(series))
        .catch((err: Error) => {
          const box = this.el("history-error");
          box.hidden = false;
          box.textContent = err.message;
        });
    });
  }

  showSeries(series: SeriesPoint[]): void {
    this.lastSeries = series;
    this.el("history-error").hidden = true;
    this.el("history-line").setAttribute(
      "points",
      polylinePoints(series, CHART_W, CHART_H),
    );
    this.el("history-summary").textContent = seriesSummary(series);
  }

  get currentSeries(): SeriesPoint[] {
    return this.lastSeries;
  }

  // -- projection ------------------------------------------------------------

  render(): void {
    // Follow the connection: landing live shows the monitor, a failure
    // returns to the form so the retry affordance is in front.
    if (this.dash.phase !== this.lastPhase) {
      if (this.dash.phase === "live") this.active = "monitor";
      if (this.dash.phase === "failed") this.active = "connect";
      this.lastPhase = this.dash.phase;
    }
    for (const tab of TABS) {
      this.el(`panel-${tab}`).hidden = tab !== this.active;
      this.el(`tab-${tab}`).classList.toggle("active", tab === this.active);
    }

    const chip = this.el("mode-chip");
    chip.textContent = this.dash.mode === "unknown" ? "—" : this.dash.mode;
    chip.className = `chip mode-${this.dash.mode}`;

    this.el("phase-label").textContent = this.phaseText();
    this.el("stale-banner").hidden = !this.dash.stale;

    const error = this.el("connect-error");
    error.hidden = this.dash.error === null;
    error.textContent = this.dash.error ?? "";

    const live = this.dash.live;
    for (const [key] of READINGS) {
      this.el(`reading-${key}`).textContent =
        live === null ? "—" : this.readingText(key, live[key]);
      this.el(`spark-${key}`).setAttribute(
        "points",
        polylinePoints(this.dash.sparks[key] ?? [], SPARK_W, SPARK_H),
      );
    }
    for (const [, field, , limit] of ACTUATOR_TABLE) {
      const value = this.el(`badge-${field}`).querySelector(".badge-value");
      if (!value) continue;
      if (live === null) value.textContent = "—";
      else if (limit === 1) value.textContent = live.bank[field] ? "on" : "off";
      else value.textContent = `${live.bank[field]}/${limit}`;
    }
    this.el("monitor-updated").textContent =
      live === null
        ? "waiting for the first push"
        : `updated ${new Date(live.at).toLocaleTimeString()}`;

    // Steering is disabled until the session is live.
    const offline = !this.dash.connected;
    for (const [, field, , limit] of ACTUATOR_TABLE) {
      const id = limit > 1 ? `slider-${field}` : `toggle-${field}`;
      this.el<HTMLInputElement>(id).disabled = offline;
    }
    this.el<HTMLButtonElement>("auto-apply").disabled = offline;
    this.el<HTMLButtonElement>("history-refresh").disabled = offline;

    if (live !== null) this.syncControls(live.bank);
  }

  private readingText(key: string, value: number): string {
    if (key === "soil") return value ? "wet" : "dry";
    return String(value);
  }

  /** Align idle controls with the echoed bank; never fight an element
   * the user is actively holding. */
  private syncControls(bank: Bank): void {
    const activeId =
      this.root.ownerDocument.activeElement instanceof HTMLElement
        ? this.root.ownerDocument.activeElement.id
        : "";
    for (const [, field, , limit] of ACTUATOR_TABLE) {
      if (limit > 1) {
        const slider = this.el<HTMLInputElement>(`slider-${field}`);
        if (slider.id !== activeId) {
          slider.value = String(bank[field]);
          this.el(`slider-${field}-value`).textContent = slider.value;
        }
      } else {
        const toggle = this.el<HTMLInputElement>(`toggle-${field}`);
        if (toggle.id !== activeId) toggle.checked = bank[field] === 1;
      }
    }
  }

  private phaseText(): string {
    switch (this.dash.phase) {
      case "idle":
        return "not connected";
      case "connecting":
        return "connecting…";
      case "authenticating":
        return "authenticating…";
      case "live":
        return "live";
      case "failed":
        return "connection failed";
    }
  }

  private el<T extends Element = HTMLElement>(id: string): T {
    const found = this.root.querySelector(`#${id}`);
    if (!found) throw new Error(`missing element #${id}`);
    return found as T;
  }
}

export type { BankField };
