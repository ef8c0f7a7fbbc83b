// Pedal input: press-and-hold keys ramp like pedal travel; a gamepad, when
// present, supplies analog axes directly. Sampled at the send rate; values
// always clamped to [0, 1] and timestamps monotonic.

import { clamp01 } from "./protocol.js";

export const RAMP_SECONDS = 0.4;

export interface PedalSample {
  throttle: number;
  brake: number;
  timestamp: number;
}

export class PedalInput {
  private throttleHeld = false;
  private brakeHeld = false;
  private throttle = 0;
  private brake = 0;
  private lastSampleAt: number | null = null;
  private lastTimestamp = -Infinity;

  constructor(private readonly now: () => number) {}

  keyDown(key: string): void {
    if (key === "ArrowUp" || key === "w") this.throttleHeld = true;
    if (key === "ArrowDown" || key === "s") this.brakeHeld = true;
  }

  keyUp(key: string): void {
    if (key === "ArrowUp" || key === "w") this.throttleHeld = false;
    if (key === "ArrowDown" || key === "s") this.brakeHeld = false;
  }

  releaseAll(): void {
    this.throttleHeld = false;
    this.brakeHeld = false;
    this.throttle = 0;
    this.brake = 0;
  }

  /** Feed analog pedals straight through (gamepad axes win over keys). */
  setAnalog(throttle: number, brake: number): void {
    this.throttle = clamp01(throttle);
    this.brake = clamp01(brake);
    this.lastSampleAt = this.now();
  }

  sample(): PedalSample {
    const t = this.now();
    const dt = this.lastSampleAt === null ? 0 : Math.max(0, t - this.lastSampleAt);
    this.lastSampleAt = t;
    const step = dt / RAMP_SECONDS;
    this.throttle = clamp01(this.throttle + (this.throttleHeld ? step : -step));
    this.brake = clamp01(this.brake + (this.brakeHeld ? step : -step));
    // Timestamps must be strictly monotonic even under clock hiccups.
    const timestamp = t > this.lastTimestamp ? t : this.lastTimestamp + 1e-6;
    this.lastTimestamp = timestamp;
    return { throttle: this.throttle, brake: this.brake, timestamp };
  }
}

/** First connected gamepad's (throttle, brake), or null when absent. */
export function readGamepad(pads: (Gamepad | null)[]): [number, number] | null {
  for (const pad of pads) {
    if (!pad || !pad.connected) continue;
    // Triggers on standard mapping: buttons 7 (accelerate) and 6 (brake);
    // fall back to the right stick vertical axis.
    const accel = pad.buttons[7]?.value ?? 0;
    const brake = pad.buttons[6]?.value ?? 0;
    if (accel > 0 || brake > 0) return [clamp01(accel), clamp01(brake)];
    const axis = pad.axes[3] ?? 0;
    if (Math.abs(axis) > 0.05) {
      return axis < 0 ? [clamp01(-axis), 0] : [0, clamp01(axis)];
    }
    return [0, 0];
  }
  return null;
}
