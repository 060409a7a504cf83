/** Top-down 2-D vector rendering of the board, pegs, and both tools.
 *
 * Geometry is computed in `computeDrawModel` (pure, unit tested); the
 * canvas calls live in `render`. The solid tool always comes from the
 * remote snapshot, so it freezes while the link is down; the translucent
 * ghost comes from the twin snapshot and keeps moving.
 */

import { SceneWire, StateFrame, Vec3Wire } from "./protocol.js";

export interface CanvasDims {
  width: number;
  height: number;
}

export interface Circle {
  x: number;
  y: number;
  r: number;
}

export interface DrawModel {
  posts: { id: string; circle: Circle; side: "left" | "right" }[];
  solidPegs: { id: string; circle: Circle }[];
  ghostPegs: { id: string; circle: Circle }[];
  solidTool: { circle: Circle; jawOpen: boolean } | null;
  ghostTool: { circle: Circle; jawOpen: boolean } | null;
  badge: string;
  linkUp: boolean;
  locked: boolean;
  bufferBar: { fraction: number; depth: number };
  timerText: string;
}

/** Board extent mapped into the canvas with a fixed margin. */
export function boardToCanvas(p: Vec3Wire, dims: CanvasDims): { x: number; y: number } {
  const extent = 0.07; // meters of half-width shown
  const scale = (Math.min(dims.width, dims.height) - 40) / (2 * extent);
  return {
    x: dims.width / 2 + p.x * scale,
    y: dims.height / 2 - p.y * scale,
  };
}

const JAW_OPEN_THRESHOLD = 0.5;
const POST_RADIUS_PX = 10;
const PEG_RADIUS_PX = 7;
const TOOL_RADIUS_PX = 9;

function toolFromScene(scene: SceneWire, dims: CanvasDims) {
  if (!scene.tool) return null;
  const c = boardToCanvas(scene.tool.pose.position, dims);
  return { circle: { ...c, r: TOOL_RADIUS_PX }, jawOpen: scene.tool.jaw > JAW_OPEN_THRESHOLD };
}

export function computeDrawModel(frame: StateFrame, dims: CanvasDims, highWater: number): DrawModel {
  const posts = frame.remote.board.posts.map((p) => ({
    id: p.id,
    side: p.side,
    circle: { ...boardToCanvas(p.position, dims), r: POST_RADIUS_PX },
  }));
  const solidPegs = frame.remote.pegs.map((p) => ({
    id: p.id,
    circle: { ...boardToCanvas(p.position, dims), r: PEG_RADIUS_PX },
  }));
  const ghostPegs = frame.twin.pegs.map((p) => ({
    id: p.id,
    circle: { ...boardToCanvas(p.position, dims), r: PEG_RADIUS_PX },
  }));
  const bufferDepth = frame.mode === "recovery" ? frame.buffer_depth : 0;
  return {
    posts,
    solidPegs,
    ghostPegs,
    solidTool: toolFromScene(frame.remote, dims),
    ghostTool: toolFromScene(frame.twin, dims),
    badge: frame.mode.toUpperCase(),
    linkUp: frame.link === "up",
    locked: frame.operator_locked,
    bufferBar: {
      fraction: highWater > 0 ? Math.min(1, bufferDepth / highWater) : 0,
      depth: bufferDepth,
    },
    timerText: `${frame.now.toFixed(1)} s`,
  };
}

function circle(ctx: CanvasRenderingContext2D, c: Circle, style: string, fill: boolean): void {
  ctx.beginPath();
  ctx.arc(c.x, c.y, c.r, 0, 2 * Math.PI);
  if (fill) {
    ctx.fillStyle = style;
    ctx.fill();
  } else {
    ctx.strokeStyle = style;
    ctx.stroke();
  }
}

export function render(ctx: CanvasRenderingContext2D, model: DrawModel, dims: CanvasDims): void {
  ctx.clearRect(0, 0, dims.width, dims.height);
  ctx.fillStyle = "#10141a";
  ctx.fillRect(0, 0, dims.width, dims.height);

  for (const post of model.posts) {
    circle(ctx, post.circle, post.side === "left" ? "#4a6572" : "#6b4a72", false);
  }
  for (const peg of model.solidPegs) {
    circle(ctx, peg.circle, "#e8a33d", true);
  }
  ctx.globalAlpha = 0.45;
  for (const peg of model.ghostPegs) {
    circle(ctx, peg.circle, "#7fd4ff", false);
  }
  if (model.ghostTool) {
    circle(ctx, model.ghostTool.circle, "#7fd4ff", true);
  }
  ctx.globalAlpha = 1.0;
  if (model.solidTool) {
    circle(ctx, model.solidTool.circle, model.solidTool.jawOpen ? "#7fff9e" : "#ff7f7f", true);
  }

  ctx.fillStyle = model.linkUp ? "#7fff9e" : "#ff5555";
  ctx.fillRect(12, 12, 14, 14);
  ctx.fillStyle = "#e0e0e0";
  ctx.font = "14px monospace";
  ctx.fillText(model.badge + (model.locked ? " (LOCKED)" : ""), 34, 24);
  ctx.fillText(model.timerText, dims.width - 80, 24);

  const barWidth = 160;
  ctx.strokeStyle = "#888";
  ctx.strokeRect(12, dims.height - 26, barWidth, 12);
  ctx.fillStyle = "#e8a33d";
  ctx.fillRect(12, dims.height - 26, barWidth * model.bufferBar.fraction, 12);
  if (model.bufferBar.depth > 0) {
    ctx.fillStyle = "#e0e0e0";
    ctx.fillText(`catching up: ${model.bufferBar.depth}`, 12 + barWidth + 8, dims.height - 16);
  }
}
