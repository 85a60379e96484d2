/** DOM wiring: composer form, service list, topology, charts, timeline.
 *
 * All state is server-confirmed: the UI folds the event stream and refetches
 * statuses after each batch; there is no optimistic rendering.
 */

import { ApiError, GatewayClient } from "./api.js";
import { escapeHtml, lifecycleBadge, renderLineChart } from "./charts.js";
import { composePayload, Draft, draftComplete, emptyDraft } from "./composer.js";
import { applyEvents, initialState, ViewState } from "./model.js";
import { phaseLegend, renderTimeline, timingRows } from "./timeline.js";
import { renderTopology } from "./topology.js";
import type { Catalogue, InsStatus } from "./types.js";

const DEFAULT_CATALOGUE = [
  { ns_id: "svc-a", name: "edge app A", vnf: { vnfd_id: "vnf-a", image: "edge-a:1.0" } },
  { ns_id: "svc-b", name: "edge app B", vnf: { vnfd_id: "vnf-b", image: "edge-b:1.0" } },
];

class App {
  client = new GatewayClient(
    (window as unknown as { QSNET_API?: string }).QSNET_API ?? "http://127.0.0.1:8080",
  );
  state: ViewState = initialState();
  draft: Draft = emptyDraft();
  catalogue: Catalogue = {};
  services: InsStatus[] = [];
  selectedService: string | null = null;
  runId = "";
  polling = false;

  el<T extends HTMLElement>(id: string): T {
    const node = document.getElementById(id);
    if (!node) throw new Error(`missing #${id}`);
    return node as T;
  }

  async start(): Promise<void> {
    this.bind();
    await this.refreshCatalogue();
    await this.refreshServices();
    await this.refreshTopology();
    this.renderAll();
    void this.pollLoop();
  }

  bind(): void {
    this.el<HTMLButtonElement>("btn-register").onclick = () => void this.registerDemo();
    this.el<HTMLButtonElement>("btn-compose").onclick = () => void this.composeAndDeploy();
    this.el<HTMLInputElement>("toggle-secured").onchange = (ev) => {
      this.draft.secured = (ev.target as HTMLInputElement).checked;
    };
    for (const name of ["scenario1", "scenario2", "scenario3"]) {
      this.el<HTMLButtonElement>(`btn-${name}`).onclick = () => void this.runScenario(name);
    }
    this.el<HTMLSelectElement>("pick-a").onchange = () => this.pickMember("a");
    this.el<HTMLSelectElement>("pick-b").onchange = () => this.pickMember("b");
    this.el("legend").innerHTML = phaseLegend();
  }

  pickMember(which: "a" | "b"): void {
    const select = this.el<HTMLSelectElement>(`pick-${which}`);
    const [island, nsId] = select.value.split("|");
    const pick = select.value ? { island: Number(island), nsId } : null;
    if (which === "a") this.draft.memberA = pick;
    else this.draft.memberB = pick;
    this.renderComposer();
  }

  flash(message: string, isError = false): void {
    const box = this.el("flash");
    box.textContent = message;
    box.className = isError ? "flash flash-error" : "flash";
  }

  async registerDemo(): Promise<void> {
    try {
      for (let i = 1; i <= 4; i++) {
        await this.client.registerIsland(`island${i}`, `cert-island${i}`, DEFAULT_CATALOGUE);
      }
      this.flash("4 islands registered");
      await this.refreshCatalogue();
      this.renderAll();
    } catch (error) {
      this.showError(error);
    }
  }

  async composeAndDeploy(): Promise<void> {
    try {
      const payload = composePayload(this.draft);
      const composed = await this.client.compose(payload);
      this.flash(`${composed.ins_id} composed; deploying...`);
      await this.refreshServices();
      this.renderAll();
      const deployed = await this.client.deploy(composed.ins_id);
      this.flash(`${deployed.ins_id}: ${deployed.lifecycle}`);
      this.selectedService = composed.ins_id;
      await this.refreshServices();
      await this.refreshTopology();
      this.renderAll();
    } catch (error) {
      this.showError(error); // the draft is preserved untouched
    }
  }

  async runScenario(name: string): Promise<void> {
    try {
      this.state = initialState();
      this.services = [];
      await this.client.runScenario(name, 0);
      this.flash(`${name} launched`);
      await this.refreshServices();
      await this.refreshTopology();
      this.renderAll();
    } catch (error) {
      this.showError(error);
    }
  }

  showError(error: unknown): void {
    if (error instanceof ApiError) {
      const detail = error.violatedConstraint ? ` [${error.violatedConstraint}]` : "";
      this.flash(`${error.code}: ${error.message}${detail}`, true);
    } else {
      this.flash(String(error), true);
    }
  }

  async refreshCatalogue(): Promise<void> {
    try {
      this.catalogue = (await this.client.catalogue()).islands;
    } catch {
      this.catalogue = {};
    }
  }

  async refreshServices(): Promise<void> {
    try {
      this.services = (await this.client.services()).services;
    } catch {
      this.services = [];
    }
  }

  async refreshTopology(): Promise<void> {
    try {
      this.el("topology").innerHTML = renderTopology(await this.client.topology());
    } catch {
      /* gateway away; keep the last render */
    }
  }

  async pollLoop(): Promise<void> {
    if (this.polling) return;
    this.polling = true;
    for (;;) {
      try {
        const batch = await this.client.stream(this.state.nextSince, 5);
        if (batch.run_id && batch.run_id !== this.runId) {
          if (this.runId) this.state = initialState();
          this.runId = batch.run_id;
        }
        if (batch.events.length > 0) {
          this.state = applyEvents(this.state, batch.events);
          await this.refreshServices();
          await this.refreshTopology();
          this.renderAll();
        } else {
          await sleep(400);
        }
      } catch {
        await sleep(1500);
      }
    }
  }

  renderAll(): void {
    this.renderComposer();
    this.renderServices();
    this.renderTimeline();
    this.renderCharts();
    this.el("session-info").textContent =
      `${this.state.events.length} events | run ${this.runId || "-"}`;
  }

  renderComposer(): void {
    const options = (exclude: number | null) => {
      const parts = ['<option value="">pick a service</option>'];
      for (const [islandId, entry] of Object.entries(this.catalogue)) {
        if (exclude !== null && Number(islandId) === exclude) continue;
        for (const svc of entry.services) {
          parts.push(
            `<option value="${islandId}|${svc.ns_id}">${escapeHtml(entry.name)} / ${escapeHtml(svc.ns_id)}</option>`,
          );
        }
      }
      return parts.join("");
    };
    const a = this.el<HTMLSelectElement>("pick-a");
    const b = this.el<HTMLSelectElement>("pick-b");
    const keepA = a.value;
    const keepB = b.value;
    a.innerHTML = options(this.draft.memberB?.island ?? null);
    b.innerHTML = options(this.draft.memberA?.island ?? null);
    a.value = keepA;
    b.value = keepB;
    this.el<HTMLButtonElement>("btn-compose").disabled = !draftComplete(this.draft);
  }

  renderServices(): void {
    const rows = this.services.map((s) => {
      const a = s.assignment;
      const optics = a
        ? `${a.wavelength_pair_thz[0].toFixed(2)} THz | ${a.modulation} @ ${a.launch_power_dbm} dBm`
        : "";
      const secure = s.secured ? '<span class="chip chip-q">QKD</span>' : "";
      const failure = s.failure_cause
        ? `<div class="failure">${escapeHtml(s.failure_cause)}</div>`
        : "";
      const selected = s.ins_id === this.selectedService ? " selected" : "";
      return (
        `<div class="service${selected}" data-ins="${s.ins_id}">` +
        `<div class="service-head">${s.ins_id} ${secure} ${lifecycleBadge(s.lifecycle)}</div>` +
        `<div class="service-optics">${optics}</div>${failure}</div>`
      );
    });
    const list = this.el("services");
    list.innerHTML = rows.join("") || '<div class="empty">no services yet</div>';
    for (const node of Array.from(list.querySelectorAll(".service"))) {
      (node as HTMLElement).onclick = () => {
        this.selectedService = (node as HTMLElement).dataset.ins ?? null;
        this.renderAll();
      };
    }
  }

  renderTimeline(): void {
    this.el("timeline").innerHTML = renderTimeline(timingRows(this.state.events));
  }

  renderCharts(): void {
    const insId =
      this.selectedService ??
      Object.keys(this.state.services).sort().find((id) => this.state.services[id].telemetry.length > 0) ??
      null;
    const box = this.el("charts");
    if (!insId || !this.state.services[insId]) {
      box.innerHTML = '<div class="empty">select a service to chart telemetry</div>';
      return;
    }
    const points = this.state.services[insId].telemetry;
    const pick = (key: "skr_bps" | "qber" | "ber" | "pool_bits") =>
      points
        .filter((p) => p[key] !== undefined && p[key] !== null)
        .map((p) => ({ t: p.time, v: p[key] as number }));
    box.innerHTML =
      `<div class="chart-caption">${insId}</div>` +
      renderLineChart(pick("skr_bps"), { label: "secret key rate", unit: "bit/s", color: "#ef5350" }) +
      renderLineChart(pick("qber"), { label: "QBER", color: "#ffb300" }) +
      renderLineChart(pick("ber"), { label: "pre-FEC BER", color: "#42a5f5" }) +
      renderLineChart(pick("pool_bits"), { label: "key pool", unit: "bits", color: "#66bb6a" });
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const app = new App();
  void app.start();
}
