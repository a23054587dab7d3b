/**
 * Keyboard/pointer bindings and per-tick coalescing.
 *
 * Inputs are sampled on every animation frame but sent at most once per
 * received server tick: the coalescer opens one send slot per tick payload.
 */
import {
  InputMessage,
  SCREEN_HEIGHT,
  SCREEN_WIDTH,
  TouchPoint,
} from "./protocol.js";

export interface BindingState {
  held: Set<string>; // KeyboardEvent.code values currently down
  pointer: TouchPoint | null; // finger position over the touch surface
  manualSweep: boolean; // false = server-driven auto-sweep
  sweepDrag: number; // radians, used only in manual mode
}

export function initialBinding(): BindingState {
  return { held: new Set(), pointer: null, manualSweep: false, sweepDrag: 0 };
}

/** Left/right arrows turn, up arrow steps; the pointer is the finger. */
export function sampleInput(b: BindingState): InputMessage {
  let turn: -1 | 0 | 1 = 0;
  if (b.held.has("ArrowLeft") && !b.held.has("ArrowRight")) turn = -1;
  if (b.held.has("ArrowRight") && !b.held.has("ArrowLeft")) turn = 1;
  return {
    type: "input",
    turn,
    step: b.held.has("ArrowUp"),
    touch: b.pointer,
    sweep_override: b.manualSweep ? b.sweepDrag : null,
  };
}

export interface SurfaceRect {
  left: number;
  top: number;
  width: number;
  height: number;
}

/** Map a pointer position over the touch surface to phone-screen pixels. */
export function mapPointer(
  rect: SurfaceRect,
  clientX: number,
  clientY: number,
): TouchPoint {
  const fu = (clientX - rect.left) / rect.width;
  const fv = (clientY - rect.top) / rect.height;
  const clamp = (x: number, hi: number) =>
    Math.min(Math.max(Math.floor(x), 0), hi - 1);
  return {
    u: clamp(fu * SCREEN_WIDTH, SCREEN_WIDTH),
    v: clamp(fv * SCREEN_HEIGHT, SCREEN_HEIGHT),
  };
}

/** Allows exactly one input message per received tick. */
export class InputCoalescer {
  private lastSeen = -1;
  private lastSent = -1;

  onTick(frameId: number): void {
    this.lastSeen = frameId;
  }

  /** True at most once per onTick(); the caller sends when true. */
  takeSendSlot(): boolean {
    if (this.lastSeen > this.lastSent) {
      this.lastSent = this.lastSeen;
      return true;
    }
    return false;
  }

  reset(): void {
    this.lastSeen = -1;
    this.lastSent = -1;
  }
}
