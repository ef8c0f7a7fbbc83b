// Wire protocol of the session bridge: JSON text frames over a WebSocket.
// These types mirror the server schema field by field; the client never
// derives physics of its own, it only displays what arrives here.

export interface VehiclePayload {
  s: number;
  v: number;
  a: number;
  x: number;
  y: number;
  length: number;
  width: number;
  heading: number;
}

export interface CountdownPayload {
  hv_to_conflict: number;
  av_to_conflict: number | null;
  interaction_started: boolean;
  algorithm_on: boolean;
}

export interface DecisionPayload {
  strategy: "yield" | "not_yield";
  reason: string;
  accel: number;
}

export interface HelloMsg {
  kind: "hello";
  version: number;
  session_id: string;
  schema: string;
}

export interface ScenarioEntry {
  id: string;
  policy: string;
  speed_limit_kmh: number;
  label: string;
}

export interface ScenarioListMsg {
  kind: "scenario_list";
  scenarios: ScenarioEntry[];
}

export interface StateMsg {
  kind: "state";
  t: number;
  step: number;
  av: VehiclePayload | null;
  hv: VehiclePayload;
  f_theta: number | null;
  blind_zone: [number, number][];
  decision: DecisionPayload | null;
  aeb: boolean;
  countdown: CountdownPayload;
  conflict_rect: [number, number, number, number];
  lane_width_av: number;
  lane_width_hv: number;
  speed_limit_kmh: number;
}

export interface EpisodeEndMsg {
  kind: "episode_end";
  tta: number | null;
  classification: string;
  summary: {
    leader: string | null;
    speed_bin: string | null;
    v0_kmh: number | null;
    aeb_fired: boolean;
    collision: boolean;
    end_t: number;
    norm_time: number;
    aborted: boolean;
  };
}

export interface ErrorMsg {
  kind: "error";
  message: string;
}

export type ServerMsg = HelloMsg | ScenarioListMsg | StateMsg | EpisodeEndMsg | ErrorMsg;

export interface ControlMsg {
  kind: "control";
  throttle: number;
  brake: number;
  timestamp: number;
}

export interface StartMsg {
  kind: "start";
  scenario_id: string;
  seed?: number;
}

const KINDS = new Set(["hello", "scenario_list", "state", "episode_end", "error"]);

export function parseServerMsg(raw: string): ServerMsg | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const kind = (data as { kind?: unknown }).kind;
  if (typeof kind !== "string" || !KINDS.has(kind)) return null;
  return data as ServerMsg;
}

export function clamp01(x: number): number {
  if (!Number.isFinite(x)) return 0;
  return Math.min(1, Math.max(0, x));
}

export function controlMsg(throttle: number, brake: number, timestamp: number): ControlMsg {
  return { kind: "control", throttle: clamp01(throttle), brake: clamp01(brake), timestamp };
}

export function startMsg(scenarioId: string, seed?: number): StartMsg {
  const msg: StartMsg = { kind: "start", scenario_id: scenarioId };
  if (seed !== undefined) msg.seed = seed;
  return msg;
}
