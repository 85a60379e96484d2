/** View model derived purely from the gateway event stream.
 *
 * No client-side simulation: every field is a fold over received events, so
 * replaying the same stream always reproduces the same state.
 */

import type { StreamEvent } from "./types.js";

export interface TelemetryPoint {
  time: number;
  skr_bps?: number;
  qber?: number;
  ber?: number;
  pool_bits?: number;
}

export interface ServiceView {
  insId: string;
  lifecycle: string;
  secured: boolean;
  telemetry: TelemetryPoint[];
  keyCount: number;
  lastEvent: number;
}

export interface ViewState {
  events: StreamEvent[];
  nextSince: number;
  services: Record<string, ServiceView>;
  scenarioSteps: { index: number; action: string; time: number }[];
}

export function initialState(): ViewState {
  return { events: [], nextSince: 0, services: {}, scenarioSteps: [] };
}

function service(state: ViewState, insId: string): ServiceView {
  if (!state.services[insId]) {
    state.services[insId] = {
      insId,
      lifecycle: "COMPOSED",
      secured: false,
      telemetry: [],
      keyCount: 0,
      lastEvent: 0,
    };
  }
  return state.services[insId];
}

/** Fold a batch of events into the state; pure given (state, batch). */
export function applyEvents(state: ViewState, batch: StreamEvent[]): ViewState {
  const next: ViewState = {
    events: state.events.concat(batch),
    nextSince: state.nextSince,
    services: structuredClone(state.services),
    scenarioSteps: state.scenarioSteps.slice(),
  };
  for (const event of batch) {
    if (event.seq <= state.nextSince) continue; // defensive: drop replays
    next.nextSince = event.seq;
    const insId = event.payload["ins_id"] as string | undefined;
    if (insId) {
      service(next, insId).lastEvent = event.time;
    }
    switch (event.kind) {
      case "lifecycle": {
        const s = service(next, insId as string);
        s.lifecycle = event.payload["to"] as string;
        break;
      }
      case "ins-composed": {
        const s = service(next, insId as string);
        s.secured = Boolean(event.payload["secured"]);
        break;
      }
      case "qkd-start": {
        if (insId) service(next, insId).secured = true;
        break;
      }
      case "key-delivered": {
        if (insId) service(next, insId).keyCount += 1;
        break;
      }
      case "telemetry-sample": {
        if (!insId) break;
        const s = service(next, insId);
        s.telemetry.push({
          time: event.time,
          skr_bps: event.payload["skr_bps"] as number | undefined,
          qber: event.payload["qber"] as number | undefined,
          ber: event.payload["ber"] as number | undefined,
          pool_bits: event.payload["pool_bits"] as number | undefined,
        });
        break;
      }
      case "scenario-step": {
        next.scenarioSteps.push({
          index: event.payload["index"] as number,
          action: event.payload["action"] as string,
          time: event.time,
        });
        break;
      }
      default:
        break;
    }
  }
  return next;
}

export function serviceIds(state: ViewState): string[] {
  return Object.keys(state.services).sort();
}
