// History series helpers shared by the monitor sparklines and the
// history tab. The chart consumes the same [time, value] pairs the
// server returns over the socket, and seriesFromCsv parses the CSV
// export so the two paths can be cross-checked number for number.

export type SeriesPoint = [number, number];

/** Parse the "time,value" CSV the server's export produces. */
export function seriesFromCsv(text: string): SeriesPoint[] {
  const points: SeriesPoint[] = [];
  for (const line of text.split(/\r?\n/)) {
    const trimmed = line.trim();
    if (!trimmed || trimmed.startsWith("time,")) continue;
    const comma = trimmed.indexOf(",");
    if (comma < 0) continue;
    const t = Number(trimmed.slice(0, comma));
    const v = Number(trimmed.slice(comma + 1));
    if (!Number.isFinite(t) || !Number.isFinite(v)) continue;
    points.push([t, v]);
  }
  return points;
}

/** Map a series onto SVG polyline points for a width x height viewport.
 * A flat series draws a centered horizontal line. */
export function polylinePoints(
  series: SeriesPoint[],
  width: number,
  height: number,
): string {
  if (series.length === 0) return "";
  const ts = series.map(([t]) => t);
  const vs = series.map(([, v]) => v);
  const tMin = Math.min(...ts);
  const tMax = Math.max(...ts);
  const vMin = Math.min(...vs);
  const vMax = Math.max(...vs);
  const tSpan = tMax - tMin || 1;
  const vSpan = vMax - vMin || 1;
  return series
    .map(([t, v]) => {
      const x = ((t - tMin) / tSpan) * width;
      const y = height - ((v - vMin) / vSpan) * height;
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
}

/** Short textual summary shown next to a chart. */
export function seriesSummary(series: SeriesPoint[]): string {
  if (series.length === 0) return "no data";
  const vs = series.map(([, v]) => v);
  const last = vs[vs.length - 1];
  const min = Math.min(...vs);
  const max = Math.max(...vs);
  return `${series.length} points, last ${fmt(last ?? 0)}, range ${fmt(min)}..${fmt(max)}`;
}

const fmt = (v: number): string =>
  Number.isInteger(v) ? String(v) : v.toFixed(2);
