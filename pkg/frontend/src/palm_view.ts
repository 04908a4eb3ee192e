/**
 * The palm display: a fixed disk with the felt stimulus dots inside it.
 *
 * Dots are drawn at their palm-local offsets with brightness proportional to
 * intensity; anything outside the palm disk is not felt and not drawn. When
 * no dot has been visible for a while the view raises a "stimulus lost"
 * indicator, which is the cue to sweep around and find the circle again.
 */

import type { StimulusPoint } from "./protocol.js";

export const LOST_AFTER_MS = 500;

export class PalmView {
  readonly palmRadiusMm: number;
  private points: StimulusPoint[] = [];
  private lastVisibleAt: number | undefined;
  private startedAt = 0;
  private activeSlot = 0;

  constructor(palmRadiusMm = 40) {
    this.palmRadiusMm = palmRadiusMm;
  }

  reset(nowMs: number): void {
    this.points = [];
    this.lastVisibleAt = undefined;
    this.startedAt = nowMs;
    this.activeSlot = 0;
  }

  update(points: StimulusPoint[], nowMs: number, activeSlot = 0): void {
    this.points = points;
    this.activeSlot = activeSlot;
    if (this.visiblePoints().length > 0) {
      this.lastVisibleAt = nowMs;
    }
  }

  /** Only dots that actually land on the palm disk are felt. */
  visiblePoints(): StimulusPoint[] {
    return this.points.filter(
      (p) => Math.hypot(p.offset[0], p.offset[1]) <= this.palmRadiusMm,
    );
  }

  isLost(nowMs: number): boolean {
    const reference = this.lastVisibleAt ?? this.startedAt;
    return nowMs - reference > LOST_AFTER_MS;
  }

  /** Draw the palm disk and dots; pxPerMm sets the display scale. */
  draw(ctx: CanvasRenderingContext2D, width: number, height: number, pxPerMm = 3): void {
    const cx = width / 2;
    const cy = height / 2;
    ctx.clearRect(0, 0, width, height);

    ctx.beginPath();
    ctx.arc(cx, cy, this.palmRadiusMm * pxPerMm, 0, 2 * Math.PI);
    ctx.fillStyle = "#1d2733";
    ctx.fill();
    ctx.strokeStyle = "#3b4a5a";
    ctx.lineWidth = 2;
    ctx.stroke();

    for (const p of this.visiblePoints()) {
      const alpha = 0.25 + 0.75 * Math.max(0, Math.min(1, p.intensity));
      const r = p.slot === this.activeSlot ? 7 : 5;
      ctx.beginPath();
      ctx.arc(cx + p.offset[0] * pxPerMm, cy - p.offset[1] * pxPerMm, r, 0, 2 * Math.PI);
      ctx.fillStyle = `rgba(126, 211, 255, ${alpha.toFixed(3)})`;
      ctx.fill();
    }
  }
}
