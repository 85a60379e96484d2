/** Fixed hub diagram of the 4-degree node: islands around the switch,
 * wavelength chips per output port, quantum routes as dashed arcs.
 */

import type { TopologyView } from "./types.js";

const ISLAND_POS: Record<number, [number, number]> = {
  1: [80, 90],
  2: [80, 330],
  3: [520, 90],
  4: [520, 330],
};

const GRID_COLORS: Record<string, string> = {
  "195": "#42a5f5",
  "195.1": "#66bb6a",
  "195.2": "#ffb300",
  "195.3": "#ab47bc",
};

function waveColor(thz: number): string {
  return GRID_COLORS[String(thz)] ?? "#90a4ae";
}

function portAnchor(topo: TopologyView, port: string): [number, number] | null {
  const degree = Number(port.replace(/^\D+/, ""));
  const island = topo.islands.find((i) => Number(i.port.replace(/^\D+/, "")) === degree);
  if (!island) return null;
  return ISLAND_POS[island.id] ?? null;
}

export function renderTopology(topo: TopologyView): string {
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="600" height="420" viewBox="0 0 600 420" class="topology">`,
  );
  const hub: [number, number] = [300, 210];
  parts.push(
    `<rect x="${hub[0] - 58}" y="${hub[1] - 44}" width="116" height="88" rx="10" class="hub"/>`,
    `<text x="${hub[0]}" y="${hub[1] - 8}" text-anchor="middle" class="hub-label">q-ROADM</text>`,
    `<text x="${hub[0]}" y="${hub[1] + 12}" text-anchor="middle" class="hub-sub">${topo.degrees} degrees</text>`,
  );
  for (const island of topo.islands) {
    const pos = ISLAND_POS[island.id];
    if (!pos) continue;
    const [x, y] = pos;
    parts.push(`<line x1="${x}" y1="${y}" x2="${hub[0]}" y2="${hub[1]}" class="fibre"/>`);
    const mx = (x + hub[0]) / 2;
    const my = (y + hub[1]) / 2;
    parts.push(
      `<text x="${mx}" y="${my - 6}" text-anchor="middle" class="fibre-label">${island.fibre_km} km</text>`,
    );
  }
  for (const [inPort, outPort] of topo.quantum_routes) {
    const a = portAnchor(topo, inPort);
    const b = portAnchor(topo, outPort);
    if (!a || !b) continue;
    const bend = 38;
    const cx = (a[0] + b[0]) / 2 + (a[1] === b[1] ? 0 : bend);
    const cy = (a[1] + b[1]) / 2 - bend;
    parts.push(
      `<path d="M ${a[0]} ${a[1]} Q ${cx} ${cy} ${b[0]} ${b[1]}" class="quantum-route">` +
        `<title>quantum ${inPort} -> ${outPort}</title></path>`,
    );
  }
  for (const island of topo.islands) {
    const pos = ISLAND_POS[island.id];
    if (!pos) continue;
    const [x, y] = pos;
    const local = island.port.startsWith("local");
    parts.push(
      `<circle cx="${x}" cy="${y}" r="34" class="island ${local ? "island-drop" : ""}"/>`,
      `<text x="${x}" y="${y - 2}" text-anchor="middle" class="island-label">${island.name}</text>`,
      `<text x="${x}" y="${y + 14}" text-anchor="middle" class="island-port">${island.port}</text>`,
    );
    const egress = local ? `drop${island.port.replace(/^\D+/, "")}` : island.port;
    const bands = topo.passbands[egress] ?? [];
    bands.forEach((band, i) => {
      const chipX = x - 30 + i * 17;
      const chipY = y + 42;
      parts.push(
        `<rect x="${chipX}" y="${chipY}" width="14" height="8" rx="2" fill="${waveColor(band.center_thz)}">` +
          `<title>${band.center_thz} THz toward ${island.name}</title></rect>`,
      );
    });
  }
  parts.push(`</svg>`);
  return parts.join("");
}
