/** Client-side state: the latest complete frame plus connection and input state.
 *
 * Only authoritative server frames are stored; there is no client-side
 * prediction and no interpolation, so what the user sees is exactly the
 * controller's truth. A malformed frame keeps the last good one and records
 * an error note for the toast area.
 */

import { ErrorFrame, EventFrame, ServerFrame, StateFrame, parseServerFrame } from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface InputMappingState {
  /** Meters of board per pixel of pointer motion. */
  scale: number;
  /** Current commanded height above the board plane, meters. */
  depth: number;
  jawOpen: boolean;
}

export class ViewModel {
  frame: StateFrame | null = null;
  connection: ConnectionStatus = "connecting";
  input: InputMappingState = { scale: 0.00025, depth: 0.01, jawOpen: true };
  lastError: string | null = null;
  events: EventFrame[] = [];
  taskDone: EventFrame | null = null;
  framesSeen = 0;

  /** Feed one raw socket message; returns the parsed frame, if any. */
  ingest(raw: string): ServerFrame | null {
    const frame = parseServerFrame(raw);
    if (frame === null) {
      this.lastError = "malformed frame retained last good state";
      return null;
    }
    if (frame.type === "state") {
      this.frame = frame;
      this.framesSeen += 1;
    } else if (frame.type === "event") {
      this.events.push(frame);
      if (this.events.length > 50) this.events.shift();
      if (frame.name === "task_done") this.taskDone = frame;
    } else {
      this.lastError = (frame as ErrorFrame).message;
    }
    return frame;
  }

  /** Ghost-to-solid tool gap in meters; 0 when either tool is missing. */
  divergence(): number {
    const f = this.frame;
    if (!f || !f.remote.tool || !f.twin.tool) return 0;
    const a = f.remote.tool.pose.position;
    const b = f.twin.tool.pose.position;
    return Math.hypot(a.x - b.x, a.y - b.y, a.z - b.z);
  }

  /** Buffer catch-up progress; nonzero only during recovery. */
  bufferBarDepth(): number {
    const f = this.frame;
    if (!f || f.mode !== "recovery") return 0;
    return f.buffer_depth;
  }

  elapsedSeconds(): number {
    return this.frame ? this.frame.now : 0;
  }
}
