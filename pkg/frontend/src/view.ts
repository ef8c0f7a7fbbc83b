// Session view-state: one mutable snapshot fed only by server messages.
// Nothing here advances on its own clock - if the bridge stops broadcasting,
// the scene is frozen by construction.

import {
  EpisodeEndMsg,
  ScenarioEntry,
  ServerMsg,
  StateMsg,
} from "./protocol.js";

export type Connection = "disconnected" | "connecting" | "connected";

export interface SessionView {
  connection: Connection;
  sessionId: string | null;
  scenarios: ScenarioEntry[];
  state: StateMsg | null;
  episodeEnd: EpisodeEndMsg | null;
  lastError: string | null;
  running: boolean;
}

export function emptyView(): SessionView {
  return {
    connection: "disconnected",
    sessionId: null,
    scenarios: [],
    state: null,
    episodeEnd: null,
    lastError: null,
    running: false,
  };
}

export function applyServerMsg(view: SessionView, msg: ServerMsg): SessionView {
  switch (msg.kind) {
    case "hello":
      return { ...view, sessionId: msg.session_id, lastError: null };
    case "scenario_list":
      return { ...view, scenarios: msg.scenarios };
    case "state":
      return { ...view, state: msg, running: true, episodeEnd: null };
    case "episode_end":
      return { ...view, episodeEnd: msg, running: false };
    case "error":
      return { ...view, lastError: msg.message };
  }
}

export function setConnection(view: SessionView, connection: Connection): SessionView {
  const next = { ...view, connection };
  if (connection !== "connected") {
    next.running = false;
  }
  return next;
}

// ---------------------------------------------------------------------------
// Scene derivation: a pure projection of the latest state message into the
// drawable description. Every quantity comes from a payload field.

export interface RectShape {
  kind: "rect";
  x: number;     // world center x
  y: number;     // world center y
  w: number;     // extent along world x
  h: number;     // extent along world y
  role: "conflict" | "truck" | "car" | "marker";
}

export interface PolyShape {
  kind: "poly";
  points: [number, number][];
  role: "blind_zone";
}

export interface LaneShape {
  kind: "lane";
  orientation: "horizontal" | "vertical";
  center: number;
  width: number;
}

export type Shape = RectShape | PolyShape | LaneShape;

export interface Hud {
  fTheta: number | null;
  decision: string | null;     // "yield" | "not_yield" | "aeb"
  decisionReason: string | null;
  aeb: boolean;
  hvSpeedKmh: number;
  avSpeedKmh: number | null;
  speedLimitKmh: number;
  hvToConflict: number;
  avToConflict: number | null;
  interactionStarted: boolean;
  algorithmOn: boolean;
  t: number;
}

export interface Scene {
  shapes: Shape[];
  hud: Hud;
}

function bodyRect(v: { x: number; y: number; length: number; width: number; heading: number },
                  role: "truck" | "car"): RectShape {
  const alongX = Math.abs(Math.cos(v.heading)) > 0.5;
  return {
    kind: "rect",
    x: v.x,
    y: v.y,
    w: alongX ? v.length : v.width,
    h: alongX ? v.width : v.length,
    role,
  };
}

export function deriveScene(state: StateMsg): Scene {
  const shapes: Shape[] = [];
  shapes.push({ kind: "lane", orientation: "horizontal", center: -state.lane_width_hv / 2, width: state.lane_width_hv });
  shapes.push({ kind: "lane", orientation: "vertical", center: state.lane_width_av / 2, width: state.lane_width_av });
  const [x0, x1, y0, y1] = state.conflict_rect;
  shapes.push({ kind: "rect", x: (x0 + x1) / 2, y: (y0 + y1) / 2, w: x1 - x0, h: y1 - y0, role: "conflict" });
  shapes.push({ kind: "poly", points: state.blind_zone, role: "blind_zone" });
  shapes.push(bodyRect(state.hv, "truck"));
  if (state.av !== null) {
    shapes.push(bodyRect(state.av, "car"));
  }

  const decision = state.aeb ? "aeb" : state.decision ? state.decision.strategy : null;
  const hud: Hud = {
    fTheta: state.f_theta,
    decision,
    decisionReason: state.decision ? state.decision.reason : null,
    aeb: state.aeb,
    hvSpeedKmh: state.hv.v * 3.6,
    avSpeedKmh: state.av === null ? null : state.av.v * 3.6,
    speedLimitKmh: state.speed_limit_kmh,
    hvToConflict: state.countdown.hv_to_conflict,
    avToConflict: state.countdown.av_to_conflict,
    interactionStarted: state.countdown.interaction_started,
    algorithmOn: state.countdown.algorithm_on,
    t: state.t,
  };
  return { shapes, hud };
}

export function sceneOf(view: SessionView): Scene | null {
  return view.state === null ? null : deriveScene(view.state);
}

// ---------------------------------------------------------------------------
// End-of-episode card: objective metrics only, verbatim from the payload.

export interface EndCard {
  tta: number | null;
  classification: string;
  leader: string | null;
  v0Kmh: number | null;
  aebFired: boolean;
  aborted: boolean;
}

export function endCard(msg: EpisodeEndMsg): EndCard {
  return {
    tta: msg.tta,
    classification: msg.classification,
    leader: msg.summary.leader,
    v0Kmh: msg.summary.v0_kmh,
    aebFired: msg.summary.aeb_fired,
    aborted: msg.summary.aborted,
  };
}
