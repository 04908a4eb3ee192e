/**
 * Map pointer and wheel input onto hand motion.
 *
 * Dragging moves the hand in its horizontal plane (1 px = `scale` mm, screen
 * up = +y); each wheel notch steps the hand vertically. Commanded motion is
 * rate-limited to the configured maximum speed before it is sent, so a wild
 * drag turns into a bounded glide rather than a teleport.
 */

export interface InputOptions {
  scale?: number; // mm per pixel
  zStep?: number; // mm per wheel notch
  maxSpeed?: number; // m/s
}

export type Delta = [number, number, number];

const BACKLOG_LIMIT_MM = 300;

export class InputMapper {
  readonly scale: number;
  readonly zStep: number;
  readonly maxSpeed: number;
  private pending: Delta = [0, 0, 0];

  constructor(options: InputOptions = {}) {
    this.scale = options.scale ?? 1.0;
    this.zStep = options.zStep ?? 10.0;
    this.maxSpeed = options.maxSpeed ?? 0.45;
  }

  /** Pointer drag in screen pixels; screen y grows downward. */
  addPointer(dxPx: number, dyPx: number): void {
    this.pending[0] += dxPx * this.scale;
    this.pending[1] += -dyPx * this.scale;
    this.clampBacklog();
  }

  /** One wheel event; scrolling up (negative deltaY) raises the hand. */
  addWheel(deltaY: number): void {
    if (deltaY === 0) {
      return;
    }
    this.pending[2] += deltaY < 0 ? this.zStep : -this.zStep;
    this.clampBacklog();
  }

  /**
   * Displacement to send for a frame of `dtSeconds`, speed-clamped; the
   * remainder stays queued. Returns null when there is nothing to send.
   */
  flush(dtSeconds: number): Delta | null {
    const [x, y, z] = this.pending;
    const mag = Math.hypot(x, y, z);
    if (mag === 0 || dtSeconds <= 0) {
      return null;
    }
    const cap = this.maxSpeed * 1000 * dtSeconds;
    if (mag <= cap) {
      this.pending = [0, 0, 0];
      return [x, y, z];
    }
    const f = cap / mag;
    const out: Delta = [x * f, y * f, z * f];
    this.pending = [x - out[0], y - out[1], z - out[2]];
    return out;
  }

  get queued(): Delta {
    return [...this.pending];
  }

  reset(): void {
    this.pending = [0, 0, 0];
  }

  private clampBacklog(): void {
    const mag = Math.hypot(...this.pending);
    if (mag > BACKLOG_LIMIT_MM) {
      const f = BACKLOG_LIMIT_MM / mag;
      this.pending = [this.pending[0] * f, this.pending[1] * f, this.pending[2] * f];
    }
  }
}
