import { describe, expect, it } from "vitest";

import { LOST_AFTER_MS, PalmView } from "../src/palm_view.js";
import type { StimulusPoint } from "../src/protocol.js";

function circlePoints(radius: number, centerOffset: [number, number] = [0, 0],
  n = 10): StimulusPoint[] {
  const points: StimulusPoint[] = [];
  for (let i = 0; i < n; i++) {
    const ang = (2 * Math.PI * i) / n;
    points.push({
      slot: i,
      offset: [centerOffset[0] + radius * Math.cos(ang),
        centerOffset[1] + radius * Math.sin(ang)],
      intensity: 1,
    });
  }
  return points;
}

describe("palm containment", () => {
  it("shows all ten dots of a centred 30 mm circle", () => {
    const view = new PalmView(40);
    view.reset(0);
    view.update(circlePoints(30), 10);
    expect(view.visiblePoints()).toHaveLength(10);
  });

  it("shows nothing when the circle misses the palm", () => {
    const view = new PalmView(40);
    view.reset(0);
    view.update(circlePoints(80), 10);
    expect(view.visiblePoints()).toHaveLength(0);
  });

  it("shows exactly the felt subset of a straddling circle", () => {
    // Oracle: count the sample angles within the palm by plain trigonometry.
    const radius = 30;
    const offset: [number, number] = [20, 0];
    let expected = 0;
    for (let i = 0; i < 10; i++) {
      const ang = (2 * Math.PI * i) / 10;
      const x = offset[0] + radius * Math.cos(ang);
      const y = offset[1] + radius * Math.sin(ang);
      if (Math.hypot(x, y) <= 40) expected += 1;
    }
    const view = new PalmView(40);
    view.reset(0);
    view.update(circlePoints(radius, offset), 10);
    expect(view.visiblePoints()).toHaveLength(expected);
    expect(expected).toBeGreaterThan(0);
    expect(expected).toBeLessThan(10);
  });
});

describe("lost indicator", () => {
  it("raises after half a second without a visible dot", () => {
    const view = new PalmView(40);
    view.reset(0);
    view.update(circlePoints(30), 100);
    expect(view.isLost(200)).toBe(false);
    view.update(circlePoints(80), 300); // off-palm: not felt
    expect(view.isLost(400)).toBe(false); // still within the window
    expect(view.isLost(100 + LOST_AFTER_MS + 1)).toBe(true);
  });

  it("raises when no stimulus ever arrives", () => {
    const view = new PalmView(40);
    view.reset(0);
    expect(view.isLost(LOST_AFTER_MS + 1)).toBe(true);
  });

  it("clears again when dots come back", () => {
    const view = new PalmView(40);
    view.reset(0);
    view.update(circlePoints(80), 100);
    expect(view.isLost(700)).toBe(true);
    view.update(circlePoints(20), 800);
    expect(view.isLost(900)).toBe(false);
  });
});
