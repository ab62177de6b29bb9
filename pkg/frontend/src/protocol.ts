// Wire protocol of the session service, JSON text over one WebSocket.
//
// Server -> client: {"type":"state",...} | {"type":"summary",...}
//                 | {"type":"error","message":...}
// Client -> server: {"type":"obstacle","id":...,"x":...,"y":...,"z":...}
//                 | {"type":"reset"} | {"type":"load","scenario":...}
//
// Everything the UI knows about the world arrives through StateFrame;
// the client never simulates.

export interface Sphere {
  x: number;
  y: number;
  z: number;
  r: number;
}

export interface ObstacleState {
  id: string;
  x: number;
  y: number;
  z: number;
  r: number;
}

export type ContactClass = "none" | "safe" | "violation";

export interface StateFrame {
  type: "state";
  t: number;
  stage: number;
  s: number;
  sdot: number;
  joints: number[];
  spheres: Sphere[];
  obstacles: ObstacleState[];
  min_dist: number | null;
  j_stop: number;
  stopped: boolean;
  contact: ContactClass;
  psi_min: number | null;
}

export interface SummaryMsg {
  type: "summary";
  arrived: boolean;
  arrival_time: number | null;
  violations: number;
  contacts: number;
  min_dist: number | null;
  min_distance_at_stop: number | null;
  steps: number;
}

export interface ErrorMsg {
  type: "error";
  message: string;
}

export type ServerMsg = StateFrame | SummaryMsg | ErrorMsg;

export interface ObstacleCmd {
  type: "obstacle";
  id: string;
  x: number;
  y: number;
  z: number;
}

export interface ResetCmd {
  type: "reset";
}

export interface LoadCmd {
  type: "load";
  scenario: string;
}

export type ClientCmd = ObstacleCmd | ResetCmd | LoadCmd;

function num(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

// min_dist / psi_min use null for "no obstacle in the world".
function numOrNull(v: unknown): v is number | null {
  return v === null || num(v);
}

function isSphere(v: unknown): v is Sphere {
  if (typeof v !== "object" || v === null) return false;
  const o = v as Record<string, unknown>;
  return num(o.x) && num(o.y) && num(o.z) && num(o.r);
}

function isObstacle(v: unknown): v is ObstacleState {
  if (typeof v !== "object" || v === null) return false;
  const o = v as Record<string, unknown>;
  return typeof o.id === "string" && num(o.x) && num(o.y) && num(o.z) && num(o.r);
}

/** Parse one server message; null for anything malformed or unknown. */
export function parseServerMsg(text: string): ServerMsg | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null) return null;
  const o = raw as Record<string, unknown>;

  if (o.type === "error") {
    return typeof o.message === "string" ? { type: "error", message: o.message } : null;
  }

  if (o.type === "summary") {
    if (
      typeof o.arrived !== "boolean" ||
      !numOrNull(o.arrival_time) ||
      !num(o.violations) ||
      !num(o.contacts) ||
      !numOrNull(o.min_dist) ||
      !numOrNull(o.min_distance_at_stop) ||
      !num(o.steps)
    ) {
      return null;
    }
    return {
      type: "summary",
      arrived: o.arrived,
      arrival_time: o.arrival_time,
      violations: o.violations,
      contacts: o.contacts,
      min_dist: o.min_dist,
      min_distance_at_stop: o.min_distance_at_stop,
      steps: o.steps,
    };
  }

  if (o.type === "state") {
    if (
      !num(o.t) ||
      !num(o.stage) ||
      !num(o.s) ||
      !num(o.sdot) ||
      !Array.isArray(o.joints) ||
      !o.joints.every(num) ||
      !Array.isArray(o.spheres) ||
      !o.spheres.every(isSphere) ||
      !Array.isArray(o.obstacles) ||
      !o.obstacles.every(isObstacle) ||
      !numOrNull(o.min_dist) ||
      !num(o.j_stop) ||
      typeof o.stopped !== "boolean" ||
      (o.contact !== "none" && o.contact !== "safe" && o.contact !== "violation") ||
      !numOrNull(o.psi_min)
    ) {
      return null;
    }
    return {
      type: "state",
      t: o.t,
      stage: o.stage,
      s: o.s,
      sdot: o.sdot,
      joints: o.joints,
      spheres: o.spheres,
      obstacles: o.obstacles,
      min_dist: o.min_dist,
      j_stop: o.j_stop,
      stopped: o.stopped,
      contact: o.contact,
      psi_min: o.psi_min,
    };
  }

  return null;
}

export function obstacleCmd(id: string, x: number, y: number, z: number): ObstacleCmd {
  return { type: "obstacle", id, x, y, z };
}
