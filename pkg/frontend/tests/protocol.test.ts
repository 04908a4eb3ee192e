import { describe, expect, it } from "vitest";

import {
  DecodeError,
  assertMasked,
  decodeFrame,
  encodeFrame,
  parseStimulusPoints,
  type Frame,
} from "../src/protocol.js";

function circleStimulusFrame(radius = 30, n = 10): Frame {
  const points = [];
  for (let i = 0; i < n; i++) {
    const ang = (2 * Math.PI * i) / n;
    points.push({
      slot: i,
      offset: [radius * Math.cos(ang), radius * Math.sin(ang)],
      intensity: 1.0,
    });
  }
  return { kind: "stimulus", seq: 3, payload: { t: 0.1, points, active_slot: 0 } };
}

const FRAMES: Frame[] = [
  { kind: "hello", seq: 0, payload: {} },
  {
    kind: "hello", seq: 0,
    payload: {
      session: "s1", protocol: 1, trial_count: 14, sets: 1, timeout_s: 30,
      palm_radius_mm: 40, max_speed_m_s: 0.45, n_points: 10, render_freq: 10,
    },
  },
  { kind: "start_trial", seq: 1, payload: { trial_index: 1, trial_count: 14, set: 1 } },
  { kind: "hand_move", seq: 2, payload: { delta: [1.5, -2.0, 0.0] } },
  circleStimulusFrame(),
  { kind: "reached", seq: 4, payload: {} },
  {
    kind: "trial_result", seq: 5,
    payload: {
      goal_id: 3, trial_index: 1, set: 1, completed: true,
      eps_xyz: 12.5, eps_xy: 3.25, duration: 6.5, seed: 7,
    },
  },
  { kind: "abort", seq: 6, payload: { reason: "client abort" } },
];

describe("frame round trips", () => {
  it("encodes and decodes every kind unchanged", () => {
    for (const frame of FRAMES) {
      const text = encodeFrame(frame);
      expect(text).not.toContain("\n");
      expect(decodeFrame(text)).toEqual(frame);
    }
  });

  it("keeps ten palm-local offsets on a 30 mm circle", () => {
    const frame = decodeFrame(encodeFrame(circleStimulusFrame()));
    const points = parseStimulusPoints(frame);
    expect(points).toHaveLength(10);
    for (const p of points) {
      expect(Math.hypot(p.offset[0], p.offset[1])).toBeCloseTo(30, 9);
    }
  });
});

describe("decode validation", () => {
  it("rejects unknown kinds", () => {
    expect(() => decodeFrame('{"kind":"teleport","seq":0,"payload":{}}'))
      .toThrowError(DecodeError);
  });

  it("names the missing field", () => {
    try {
      decodeFrame('{"kind":"hand_move","seq":0,"payload":{}}');
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(DecodeError);
      expect((err as DecodeError).field).toBe("delta");
    }
  });

  it("rejects non-finite coordinates", () => {
    expect(() => decodeFrame('{"kind":"hand_move","seq":0,"payload":{"delta":[1,2,null]}}'))
      .toThrowError(DecodeError);
    const frame: Frame = { kind: "hand_move", seq: 0, payload: { delta: [1, 2, NaN] } };
    // JSON.stringify turns NaN into null, which decode rejects.
    expect(() => decodeFrame(encodeFrame(frame))).toThrowError(DecodeError);
  });

  it("rejects bad sequence numbers", () => {
    expect(() => decodeFrame('{"kind":"hello","seq":-1,"payload":{}}'))
      .toThrowError(DecodeError);
    expect(() => decodeFrame('{"kind":"hello","seq":1.5,"payload":{}}'))
      .toThrowError(DecodeError);
  });

  it("rejects malformed documents", () => {
    expect(() => decodeFrame("not json")).toThrowError(DecodeError);
    expect(() => decodeFrame('["hello"]')).toThrowError(DecodeError);
    expect(() => decodeFrame('{"kind":"hello","seq":0,"payload":[]}'))
      .toThrowError(DecodeError);
  });
});

describe("masking guard", () => {
  it("accepts every legitimate server frame", () => {
    for (const frame of FRAMES) {
      if (["hello", "start_trial", "stimulus", "trial_result", "abort"]
        .includes(frame.kind)) {
        expect(() => assertMasked(frame)).not.toThrow();
      }
    }
  });

  it("rejects frames that leak task geometry", () => {
    expect(() => assertMasked({
      kind: "stimulus", seq: 0,
      payload: { t: 0, points: [], goal: [0, 0, 250] },
    })).toThrow(/unexpected key/);
    expect(() => assertMasked({
      kind: "stimulus", seq: 0, payload: { t: 0, points: [], k: 0.5 },
    })).toThrow();
    expect(() => assertMasked({
      kind: "trial_result", seq: 0,
      payload: {
        goal_id: 1, trial_index: 1, set: 1, completed: true,
        eps_xyz: 1, eps_xy: 1, duration: 1, seed: 0, hand_position: [0, 0, 0],
      },
    })).toThrow();
    expect(() => assertMasked({
      kind: "stimulus", seq: 0,
      payload: { t: 0, points: [{ offset: [0, 0], intensity: 1, position: [0, 0, 300] }] },
    })).toThrow(/unexpected key 'position'/);
    expect(() => assertMasked({ kind: "hand_move", seq: 0, payload: { delta: [0, 0, 0] } }))
      .toThrow(/must not emit/);
  });
});
