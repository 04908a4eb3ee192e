import { describe, expect, it } from "vitest";

import { InputMapper } from "../src/input.js";

describe("pointer mapping", () => {
  it("maps a 10 px right drag to +10 mm x at scale 1", () => {
    const input = new InputMapper({ scale: 1 });
    input.addPointer(10, 0);
    expect(input.flush(1.0)).toEqual([10, 0, 0]);
  });

  it("maps screen-up drags to +y", () => {
    const input = new InputMapper({ scale: 1 });
    input.addPointer(0, -25);
    expect(input.flush(1.0)).toEqual([0, 25, 0]);
  });

  it("applies the display scale", () => {
    const input = new InputMapper({ scale: 0.5 });
    input.addPointer(10, 0);
    expect(input.flush(1.0)).toEqual([5, 0, 0]);
  });
});

describe("wheel mapping", () => {
  it("one notch up raises the hand 10 mm", () => {
    const input = new InputMapper({});
    input.addWheel(-120);
    expect(input.flush(1.0)).toEqual([0, 0, 10]);
  });

  it("one notch down lowers the hand 10 mm", () => {
    const input = new InputMapper({});
    input.addWheel(120);
    expect(input.flush(1.0)).toEqual([0, 0, -10]);
  });
});

describe("speed clamp", () => {
  it("caps the emitted displacement at maxSpeed x dt", () => {
    const input = new InputMapper({ scale: 1, maxSpeed: 0.45 });
    input.addPointer(100, 0); // 100 mm queued
    const dt = 1 / 30;
    const delta = input.flush(dt)!;
    const mag = Math.hypot(...delta);
    expect(mag).toBeCloseTo(0.45 * 1000 * dt, 9); // 15 mm per frame
    // the rest stays queued rather than disappearing
    expect(Math.hypot(...input.queued)).toBeCloseTo(100 - mag, 9);
  });

  it("passes small motions through unclamped", () => {
    const input = new InputMapper({ scale: 1, maxSpeed: 0.45 });
    input.addPointer(3, -4);
    expect(input.flush(1 / 30)).toEqual([3, 4, 0]);
    expect(input.flush(1 / 30)).toBeNull();
  });

  it("returns null with nothing queued or no time budget", () => {
    const input = new InputMapper({});
    expect(input.flush(0.1)).toBeNull();
    input.addPointer(5, 0);
    expect(input.flush(0)).toBeNull();
  });

  it("bounds the backlog from runaway drags", () => {
    const input = new InputMapper({ scale: 1 });
    for (let i = 0; i < 100; i++) {
      input.addPointer(100, 0);
    }
    expect(Math.hypot(...input.queued)).toBeLessThanOrEqual(300 + 1e-9);
  });
});
