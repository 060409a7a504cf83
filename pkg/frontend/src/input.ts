/** Pointer-to-pose mapping: the mouse stands in for the motion input device.
 *
 * Screen coordinates map to the board plane through a configurable scale,
 * the wheel adjusts height, and a key toggles the jaw. Commands are
 * emitted at a fixed client rate, never faster than the server tick rate,
 * and are suppressed entirely while disconnected.
 */

import { Vec3Wire, commandMessage } from "./protocol.js";
import { ViewModel } from "./viewmodel.js";

export const JAW_OPEN_VALUE = 0.8;
export const JAW_CLOSED_VALUE = 0.0;
export const MIN_DEPTH = 0.002;
export const MAX_DEPTH = 0.06;

export class InputMapper {
  private pointer: { x: number; y: number } | null = null;

  constructor(private vm: ViewModel) {}

  /** Map a pointer position within the canvas to a board-plane target. */
  pointerToBoard(px: number, py: number, width: number, height: number): Vec3Wire {
    const scale = this.vm.input.scale;
    return {
      x: (px - width / 2) * scale,
      y: (height / 2 - py) * scale,
      z: this.vm.input.depth,
    };
  }

  onPointerMove(px: number, py: number): void {
    this.pointer = { x: px, y: py };
  }

  onWheel(deltaY: number): void {
    const step = deltaY > 0 ? -0.002 : 0.002;
    const depth = this.vm.input.depth + step;
    this.vm.input.depth = Math.min(MAX_DEPTH, Math.max(MIN_DEPTH, depth));
  }

  toggleJaw(): void {
    this.vm.input.jawOpen = !this.vm.input.jawOpen;
  }

  /** Build the outgoing message for the current input state, if allowed. */
  buildCommand(width: number, height: number): string | null {
    if (this.vm.connection !== "open" || this.pointer === null) {
      return null;
    }
    const target = this.pointerToBoard(this.pointer.x, this.pointer.y, width, height);
    const jaw = this.vm.input.jawOpen ? JAW_OPEN_VALUE : JAW_CLOSED_VALUE;
    return commandMessage(target, jaw);
  }
}
