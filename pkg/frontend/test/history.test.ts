/**
 * History tab: the chart drawn from a socket series must match, point
 * for point, the chart drawn from the server's CSV export of the same
 * range.
 *
 * @vitest-environment jsdom
 */

import { beforeEach, describe, expect, it } from "vitest";

import { polylinePoints, seriesFromCsv, seriesSummary } from "../src/history.js";
import { Dashboard } from "../src/state.js";
import { Ui } from "../src/ui.js";
import { fakeWs, type FakeSocket } from "./fakes.js";

// The exact series both transports will carry.
const SERIES: [number, number][] = [
  [0.5, 24.0],
  [1.0, 24.5],
  [1.5, 25.1],
  [2.0, 24.9],
  [2.5, 23.4],
];

// What the CSV export of the same range looks like on the wire.
const CSV_TEXT =
  "time,value\n0.5,24.0\n1.0,24.5\n1.5,25.1\n2.0,24.9\n2.5,23.4\n";

const settle = async (): Promise<void> => {
  for (let i = 0; i < 5; i++) await Promise.resolve();
};

describe("series helpers", () => {
  it("parses the export CSV format", () => {
    expect(seriesFromCsv(CSV_TEXT)).toEqual(SERIES);
  });

  it("ignores blank lines, header repeats, and junk rows", () => {
    const messy = "time,value\n\n1.0,2.0\nnot,a,number\ntime,value\n2.0,3.0\n";
    expect(seriesFromCsv(messy)).toEqual([
      [1, 2],
      [2, 3],
    ]);
  });

  it("maps an empty series to an empty chart", () => {
    expect(seriesFromCsv("time,value\n")).toEqual([]);
    expect(polylinePoints([], 600, 160)).toBe("");
    expect(seriesSummary([])).toBe("no data");
  });

  it("draws a flat series as a horizontal line", () => {
    const points = polylinePoints(
      [
        [0, 5],
        [1, 5],
      ],
      100,
      50,
    );
    const ys = points.split(" ").map((p) => p.split(",")[1]);
    expect(new Set(ys).size).toBe(1);
  });
});

describe("history tab", () => {
  let socket: FakeSocket;
  let dash: Dashboard;
  let ui: Ui;

  beforeEach(() => {
    const { factory, sockets } = fakeWs();
    document.body.innerHTML = '<div id="app"></div>';
    let bound: Ui | null = null;
    dash = new Dashboard({
      wsFactory: factory,
      onChange: () => bound?.render(),
      pushPeriodMs: 600_000,
      statusPollMs: 600_000,
    });
    bound = new Ui(document.getElementById("app")!, dash, window.localStorage);
    ui = bound;
    dash.connect({
      host: "h",
      port: 1,
      username: "operator",
      password: "operator",
      remember: false,
    });
    socket = sockets[sockets.length - 1]!;
    socket.open();
    socket.receive(JSON.stringify({ op: "auth", ok: true, token: "t" }));
    socket.drain();
  });

  it("requests the selected series and charts the reply", async () => {
    (document.getElementById("history-variable") as HTMLSelectElement).value =
      "temperature";
    (document.getElementById("history-buckets") as HTMLInputElement).value =
      "50";
    (document.getElementById("history-refresh") as HTMLButtonElement).click();

    const sent = socket.drain().map((s) => JSON.parse(s) as object);
    expect(sent).toEqual([
      { op: "history", variable: "temperature", buckets: 50 },
    ]);

    socket.receive(
      JSON.stringify({ op: "history", ok: true, series: SERIES }),
    );
    await settle();

    expect(ui.currentSeries).toEqual(SERIES);
    const drawn = document
      .getElementById("history-line")!
      .getAttribute("points");
    expect(drawn).toBe(polylinePoints(SERIES, 600, 160));
    expect(drawn).not.toBe("");
  });

  it("chart from the socket equals chart from the CSV export", async () => {
    (document.getElementById("history-refresh") as HTMLButtonElement).click();
    socket.drain();
    socket.receive(
      JSON.stringify({ op: "history", ok: true, series: SERIES }),
    );
    await settle();

    const fromSocket = document
      .getElementById("history-line")!
      .getAttribute("points");
    const fromCsv = polylinePoints(seriesFromCsv(CSV_TEXT), 600, 160);
    expect(fromSocket).toBe(fromCsv);
    expect(seriesFromCsv(CSV_TEXT)).toEqual(ui.currentSeries);
  });

  it("fills the monitor sparklines from short history queries", async () => {
    dash.refreshSparklines(8);
    const sent = socket.drain().map((s) => JSON.parse(s) as object);
    expect(sent).toEqual([
      { op: "history", variable: "temperature", buckets: 8 },
      { op: "history", variable: "humidity", buckets: 8 },
      { op: "history", variable: "light", buckets: 8 },
      { op: "history", variable: "soil", buckets: 8 },
    ]);
    for (let i = 0; i < 4; i++) {
      socket.receive(
        JSON.stringify({ op: "history", ok: true, series: SERIES }),
      );
    }
    await settle();
    expect(
      document.getElementById("spark-temperature")!.getAttribute("points"),
    ).toBe(polylinePoints(SERIES, 120, 24));
    expect(dash.sparks["soil"]).toEqual(SERIES);
  });

  it("shows the server's error without disturbing the last chart", async () => {
    (document.getElementById("history-refresh") as HTMLButtonElement).click();
    socket.receive(
      JSON.stringify({ op: "history", ok: false, error: "unknown variable" }),
    );
    await settle();
    const box = document.getElementById("history-error")!;
    expect(box.hidden).toBe(false);
    expect(box.textContent).toContain("unknown variable");
  });
});
