/** Minimal dependency-free line charts for live telemetry series. */

export interface Point {
  t: number;
  v: number;
}

export interface ChartOptions {
  width?: number;
  height?: number;
  color?: string;
  label: string;
  unit?: string;
}

function fmt(x: number): string {
  if (x === 0) return "0";
  const abs = Math.abs(x);
  if (abs >= 1000) return x.toFixed(0);
  if (abs >= 1) return Number(x.toFixed(2)).toString();
  return x.toExponential(1);
}

export function renderLineChart(points: Point[], opts: ChartOptions): string {
  const width = opts.width ?? 280;
  const height = opts.height ?? 110;
  const color = opts.color ?? "#42a5f5";
  const pad = { left: 46, right: 8, top: 18, bottom: 16 };
  const header = `<text x="6" y="13" class="chart-title">${opts.label}${opts.unit ? ` (${opts.unit})` : ""}</text>`;
  if (points.length === 0) {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" class="chart">` +
      `${header}<text x="${pad.left}" y="${height / 2}" class="chart-empty">no samples</text></svg>`
    );
  }
  const t0 = points[0].t;
  const t1 = points[points.length - 1].t;
  const vs = points.map((p) => p.v);
  let vMin = Math.min(...vs, 0);
  let vMax = Math.max(...vs);
  if (vMax === vMin) vMax = vMin + 1;
  const spanT = Math.max(t1 - t0, 1e-9);
  const x = (t: number) => pad.left + ((t - t0) / spanT) * (width - pad.left - pad.right);
  const y = (v: number) =>
    height - pad.bottom - ((v - vMin) / (vMax - vMin)) * (height - pad.top - pad.bottom);
  const path = points
    .map((p, i) => `${i === 0 ? "M" : "L"}${x(p.t).toFixed(1)},${y(p.v).toFixed(1)}`)
    .join(" ");
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" class="chart">` +
    header +
    `<text x="4" y="${y(vMax) + 4}" class="chart-tick">${fmt(vMax)}</text>` +
    `<text x="4" y="${y(vMin)}" class="chart-tick">${fmt(vMin)}</text>` +
    `<line x1="${pad.left}" y1="${y(vMin)}" x2="${width - pad.right}" y2="${y(vMin)}" class="chart-axis"/>` +
    `<path d="${path}" fill="none" stroke="${color}" stroke-width="1.6"/>` +
    `</svg>`
  );
}

export function lifecycleBadge(lifecycle: string): string {
  const tone =
    lifecycle === "OPERATIONAL"
      ? "ok"
      : lifecycle === "FAILED"
        ? "bad"
        : lifecycle === "TERMINATED"
          ? "off"
          : "busy";
  return `<span class="badge badge-${tone}">${lifecycle}</span>`;
}

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}
