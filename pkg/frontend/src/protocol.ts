/** Wire protocol shared with the session service: one JSON object per frame. */

export interface Vec3Wire {
  x: number;
  y: number;
  z: number;
}

export interface QuatWire {
  w: number;
  x: number;
  y: number;
  z: number;
}

export interface PoseWire {
  position: Vec3Wire;
  orientation: QuatWire;
}

export interface ToolWire {
  pose: PoseWire;
  jaw: number;
}

export interface PegWire {
  id: string;
  location: "on_post" | "held" | "dropped";
  post: string | null;
  position: Vec3Wire;
}

export interface PostWire {
  id: string;
  side: "left" | "right";
  position: Vec3Wire;
}

export interface SceneWire {
  phase: "left_to_right" | "right_to_left" | "done";
  tool: ToolWire | null;
  pegs: PegWire[];
  board: {
    capture_radius: number;
    plane_height: number;
    posts: PostWire[];
  };
}

export interface OverlayPrimitiveWire {
  label: string;
  kind: "point" | "segment" | "polygon";
  points: [number, number][];
}

export interface StateFrame {
  type: "state";
  now: number;
  mode: "normal" | "outage" | "recovery";
  link: "up" | "down";
  strategy: "baseline" | "replay";
  remote: SceneWire;
  twin: SceneWire;
  overlay: OverlayPrimitiveWire[];
  buffer_depth: number;
  operator_locked: boolean;
}

export interface EventFrame {
  type: "event";
  name: string;
  [key: string]: unknown;
}

export interface ErrorFrame {
  type: "error";
  message: string;
  offending?: unknown;
}

export type ServerFrame = StateFrame | EventFrame | ErrorFrame;

function isVec(v: unknown): v is Vec3Wire {
  const o = v as Vec3Wire;
  return (
    typeof o === "object" && o !== null &&
    typeof o.x === "number" && typeof o.y === "number" && typeof o.z === "number"
  );
}

function isScene(v: unknown): v is SceneWire {
  const s = v as SceneWire;
  if (typeof s !== "object" || s === null) return false;
  if (!Array.isArray(s.pegs) || !s.board || !Array.isArray(s.board.posts)) return false;
  if (s.tool !== null && (!s.tool || !isVec(s.tool.pose?.position))) return false;
  return s.pegs.every((p) => isVec(p.position)) && s.board.posts.every((p) => isVec(p.position));
}

/** Parse one frame; null for anything malformed or incomplete. */
export function parseServerFrame(raw: string): ServerFrame | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  const frame = data as ServerFrame;
  if (typeof frame !== "object" || frame === null || typeof (frame as { type?: unknown }).type !== "string") {
    return null;
  }
  if (frame.type === "state") {
    const s = frame as StateFrame;
    const complete =
      typeof s.now === "number" &&
      (s.mode === "normal" || s.mode === "outage" || s.mode === "recovery") &&
      (s.link === "up" || s.link === "down") &&
      typeof s.buffer_depth === "number" &&
      typeof s.operator_locked === "boolean" &&
      isScene(s.remote) &&
      isScene(s.twin);
    return complete ? s : null;
  }
  if (frame.type === "event") {
    return typeof (frame as EventFrame).name === "string" ? frame : null;
  }
  if (frame.type === "error") {
    return typeof (frame as ErrorFrame).message === "string" ? frame : null;
  }
  return null;
}

export function commandMessage(position: Vec3Wire, jaw: number): string {
  return JSON.stringify({
    type: "command",
    pose: { position, orientation: { w: 1, x: 0, y: 0, z: 0 } },
    jaw,
  });
}

export function setStrategyMessage(value: "baseline" | "replay"): string {
  return JSON.stringify({ type: "set_strategy", value });
}

export function resetMessage(): string {
  return JSON.stringify({ type: "reset" });
}

export function injectOutageMessage(duration: number): string {
  return JSON.stringify({ type: "inject_outage", duration });
}

export function setSeedMessage(value: number): string {
  return JSON.stringify({ type: "set_seed", value });
}
