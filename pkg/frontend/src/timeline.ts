/** Per-service phase timeline, paired from start/done events exactly the way
 * the runner's timing summary pairs them, so the rendered lanes and the CSV
 * report stay one-to-one comparable.
 */

import type { StreamEvent } from "./types.js";

export interface TimingRow {
  step: number;
  phase: string;
  source: string;
  ins_id: string;
  start_s: number;
  end_s: number;
  duration_s: number;
}

const PAIRED_KINDS: Record<string, [string, string]> = {
  "ofs-config-start": ["ofs-config-done", "ofs"],
  "wss-config-start": ["wss-config-done", "wss"],
  "transceiver-config-start": ["transceiver-config-done", "voyager"],
  "vnf-deploy-start": ["vnf-deploy-done", "ns-deploy"],
  "l2-flow-start": ["l2-flow-done", "l2-flow"],
  "qkd-start": ["qkd-ack", "qkd-init"],
};

const PHASE_COLORS: Record<string, string> = {
  ofs: "#8d6e63",
  wss: "#ffb300",
  voyager: "#42a5f5",
  "ns-deploy": "#66bb6a",
  "l2-flow": "#ab47bc",
  "qkd-init": "#ef5350",
};

export function timingRows(events: StreamEvent[]): TimingRow[] {
  let step = 0;
  const open = new Map<string, StreamEvent>();
  const rows: TimingRow[] = [];
  for (const e of events) {
    if (e.kind === "scenario-step") {
      step = (e.payload["index"] as number) ?? step;
      continue;
    }
    const insId = (e.payload["ins_id"] as string | undefined) ?? "";
    if (e.kind in PAIRED_KINDS) {
      const [doneKind] = PAIRED_KINDS[e.kind];
      open.set(`${doneKind}|${e.source}|${insId}`, e);
      continue;
    }
    const key = `${e.kind}|${e.source}|${insId}`;
    const start = open.get(key);
    if (!start) continue;
    open.delete(key);
    const phase = PAIRED_KINDS[start.kind][1];
    rows.push({
      step,
      phase,
      source: e.source,
      ins_id: insId || ((start.payload["ins_id"] as string | undefined) ?? ""),
      start_s: start.time,
      end_s: e.time,
      duration_s: round6(e.time - start.time),
    });
  }
  return rows;
}

function round6(x: number): number {
  return Math.round(x * 1e6) / 1e6;
}

function fmt(x: number): string {
  return Number(x.toFixed(2)).toString();
}

export interface TimelineOptions {
  width?: number;
  laneHeight?: number;
}

/** Render lanes (one per service, node hardware on top) as an SVG string. */
export function renderTimeline(rows: TimingRow[], opts: TimelineOptions = {}): string {
  const width = opts.width ?? 860;
  const laneHeight = opts.laneHeight ?? 26;
  if (rows.length === 0) {
    return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="40" class="timeline"><text x="8" y="24" class="tl-empty">no activity yet</text></svg>`;
  }
  const lanes: string[] = [];
  for (const row of rows) {
    const lane = row.ins_id || "node";
    if (!lanes.includes(lane)) lanes.push(lane);
  }
  lanes.sort((a, b) => (a === "node" ? -1 : b === "node" ? 1 : a < b ? -1 : 1));
  const t0 = Math.min(...rows.map((r) => r.start_s));
  const t1 = Math.max(...rows.map((r) => r.end_s));
  const span = Math.max(t1 - t0, 1e-9);
  const labelW = 90;
  const plotW = width - labelW - 10;
  const x = (t: number) => labelW + ((t - t0) / span) * plotW;
  const height = lanes.length * laneHeight + 30;
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" class="timeline">`,
  );
  lanes.forEach((lane, i) => {
    const y = 10 + i * laneHeight;
    parts.push(`<text x="4" y="${y + 15}" class="tl-label">${lane}</text>`);
    parts.push(
      `<line x1="${labelW}" y1="${y + laneHeight - 4}" x2="${width - 10}" y2="${y + laneHeight - 4}" class="tl-grid"/>`,
    );
  });
  for (const row of rows) {
    const lane = row.ins_id || "node";
    const y = 10 + lanes.indexOf(lane) * laneHeight;
    const x0 = x(row.start_s);
    const w = Math.max(x(row.end_s) - x0, 1.5);
    const color = PHASE_COLORS[row.phase] ?? "#90a4ae";
    parts.push(
      `<rect x="${fmt(x0)}" y="${y + 3}" width="${fmt(w)}" height="${laneHeight - 10}" fill="${color}" class="tl-bar">` +
        `<title>${row.phase} ${row.source} [${fmt(row.start_s)}s - ${fmt(row.end_s)}s] ${fmt(row.duration_s)}s</title></rect>`,
    );
  }
  parts.push(
    `<text x="${labelW}" y="${height - 6}" class="tl-axis">${fmt(t0)}s</text>`,
    `<text x="${width - 60}" y="${height - 6}" class="tl-axis">${fmt(t1)}s</text>`,
  );
  parts.push(`</svg>`);
  return parts.join("");
}

export function phaseLegend(): string {
  return Object.entries(PHASE_COLORS)
    .map(
      ([phase, color]) =>
        `<span class="legend-item"><span class="swatch" style="background:${color}"></span>${phase}</span>`,
    )
    .join("");
}
