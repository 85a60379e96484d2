/** Wire formats of the gateway API (v1). */

export interface StreamEvent {
  time: number;
  seq: number;
  source: string;
  kind: string;
  payload: Record<string, unknown>;
}

export interface StreamBatch {
  events: StreamEvent[];
  next_since: number;
  run_id?: string;
}

export interface CatalogueEntry {
  ns_id: string;
  name?: string;
  vnf: Record<string, unknown>;
}

export interface IslandCatalogue {
  name: string;
  services: CatalogueEntry[];
}

export type Catalogue = Record<string, IslandCatalogue>;

export interface Predicted {
  skr_bps: number;
  qber: number;
  ber: number;
}

export interface Assignment {
  request_id: string;
  src_island: number;
  dst_island: number;
  secured: boolean;
  wavelength_pair_thz: [number, number];
  modulation: string;
  launch_power_dbm: number;
  data_path_class: string;
  alice_island: number | null;
  bob_island: number | null;
  quantum_path_class: string | null;
  predicted: Predicted;
}

export interface Telemetry {
  ins_id: string;
  lifecycle: string;
  wavelengths_thz?: number[];
  modulation?: string;
  launch_power_dbm?: number;
  ber?: number;
  skr_bps?: number;
  qber?: number;
  link_state?: string;
  pool_bits?: number;
  session_state?: string;
}

export interface InsStatus {
  ins_id: string;
  members: [number, string][];
  secured: boolean;
  lifecycle: string;
  vlan: Record<string, number>;
  failure_cause: string | null;
  assignment: Assignment | null;
  telemetry: Telemetry;
}

export interface Passband {
  center_thz: number;
  width_ghz: number;
}

export interface TopologyIsland {
  id: number;
  name: string;
  port: string;
  fibre_km: number;
}

export interface TopologyView {
  degrees: number;
  grid_thz: number[];
  quantum_channel_thz: number;
  islands: TopologyIsland[];
  quantum_routes: [string, string][];
  crossconnects: [string, string][];
  passbands: Record<string, Passband[]>;
  drop_assignments: Record<string, number[]>;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  violated_constraint?: string;
}

export interface ComposeResult {
  ins_id: string;
  lifecycle: string;
}
