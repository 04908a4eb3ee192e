/**
 * Wire protocol of the trial service: newline-free JSON frames with strictly
 * increasing per-direction sequence numbers.
 *
 * The client is deliberately blind: server frames carry only palm-local
 * stimulus data and post-trial scores. decodeFrame validates shapes and
 * assertMasked rejects any frame that would leak goal coordinates, an
 * absolute hand position or the guidance progress.
 */

export const KINDS = [
  "hello",
  "start_trial",
  "hand_move",
  "stimulus",
  "reached",
  "trial_result",
  "abort",
] as const;

export type FrameKind = (typeof KINDS)[number];

export interface StimulusPoint {
  slot: number;
  offset: [number, number];
  intensity: number;
}

export interface Frame {
  kind: FrameKind;
  seq: number;
  payload: Record<string, unknown>;
}

export class DecodeError extends Error {
  readonly field: string;

  constructor(message: string, field = "") {
    super(message);
    this.name = "DecodeError";
    this.field = field;
  }
}

function isFiniteNumber(value: unknown): value is number {
  return typeof value === "number" && Number.isFinite(value);
}

function requireField(payload: Record<string, unknown>, key: string, kind: string): unknown {
  if (!(key in payload)) {
    throw new DecodeError(`${kind} frame missing field '${key}'`, key);
  }
  return payload[key];
}

function checkVector(value: unknown, name: string, length: number): void {
  if (!Array.isArray(value) || value.length !== length) {
    throw new DecodeError(`'${name}' must be a ${length}-vector`, name);
  }
  value.forEach((v, i) => {
    if (!isFiniteNumber(v)) {
      throw new DecodeError(`'${name}[${i}]' is not a finite number`, `${name}[${i}]`);
    }
  });
}

function validatePayload(kind: FrameKind, payload: Record<string, unknown>): void {
  if (kind === "hand_move") {
    checkVector(requireField(payload, "delta", kind), "delta", 3);
  } else if (kind === "stimulus") {
    const points = requireField(payload, "points", kind);
    if (!Array.isArray(points)) {
      throw new DecodeError("'points' must be a list", "points");
    }
    points.forEach((p, i) => {
      if (typeof p !== "object" || p === null || Array.isArray(p)) {
        throw new DecodeError(`'points[${i}]' must be an object`, `points[${i}]`);
      }
      const point = p as Record<string, unknown>;
      checkVector(requireField(point, "offset", kind), `points[${i}].offset`, 2);
      if (!isFiniteNumber(requireField(point, "intensity", kind))) {
        throw new DecodeError(`'points[${i}].intensity' is not a finite number`,
          `points[${i}].intensity`);
      }
    });
  } else if (kind === "trial_result") {
    for (const key of ["goal_id", "set", "completed", "eps_xyz", "eps_xy", "duration"]) {
      requireField(payload, key, kind);
    }
    for (const key of ["eps_xyz", "eps_xy", "duration"]) {
      if (!isFiniteNumber(payload[key])) {
        throw new DecodeError(`'${key}' is not a finite number`, key);
      }
    }
  } else if (kind === "abort") {
    if (typeof requireField(payload, "reason", kind) !== "string") {
      throw new DecodeError("'reason' must be a string", "reason");
    }
  }
}

export function encodeFrame(frame: Frame): string {
  const text = JSON.stringify({ kind: frame.kind, seq: frame.seq, payload: frame.payload });
  if (text.includes("\n")) {
    throw new Error("frame must not contain newlines");
  }
  return text;
}

export function decodeFrame(text: string): Frame {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (exc) {
    throw new DecodeError(`frame is not valid JSON: ${exc}`);
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new DecodeError("frame must be a JSON object");
  }
  const obj = raw as Record<string, unknown>;
  const kind = obj.kind;
  if (typeof kind !== "string" || !(KINDS as readonly string[]).includes(kind)) {
    throw new DecodeError(`unknown frame kind ${JSON.stringify(kind)}`, "kind");
  }
  const seq = obj.seq;
  if (typeof seq !== "number" || !Number.isInteger(seq) || seq < 0) {
    throw new DecodeError("'seq' must be a non-negative integer", "seq");
  }
  const payload = obj.payload ?? {};
  if (typeof payload !== "object" || payload === null || Array.isArray(payload)) {
    throw new DecodeError("'payload' must be an object", "payload");
  }
  validatePayload(kind as FrameKind, payload as Record<string, unknown>);
  return { kind: kind as FrameKind, seq, payload: payload as Record<string, unknown> };
}

/** Payload keys the server may legitimately send, per frame kind. */
const SERVER_PAYLOAD_KEYS: Record<string, ReadonlySet<string>> = {
  hello: new Set(["session", "protocol", "trial_count", "sets", "timeout_s",
    "palm_radius_mm", "max_speed_m_s", "n_points", "render_freq"]),
  start_trial: new Set(["trial_index", "trial_count", "set"]),
  stimulus: new Set(["t", "points", "active_slot"]),
  trial_result: new Set(["goal_id", "trial_index", "set", "completed",
    "eps_xyz", "eps_xy", "duration", "seed"]),
  abort: new Set(["reason"]),
};

const FORBIDDEN_KEY_PARTS = ["goal_position", "hand_position", "position", "start",
  "progress", "center"];

/**
 * Reject any server frame that could leak the goal, the absolute hand
 * position or the progress value. The view must render only what passes.
 */
export function assertMasked(frame: Frame): void {
  const allowed = SERVER_PAYLOAD_KEYS[frame.kind];
  if (allowed === undefined) {
    throw new Error(`server must not emit frame kind '${frame.kind}'`);
  }
  for (const key of Object.keys(frame.payload)) {
    if (!allowed.has(key)) {
      throw new Error(`unexpected key '${key}' in ${frame.kind} payload`);
    }
    const low = key.toLowerCase();
    if (low === "k" || FORBIDDEN_KEY_PARTS.some((part) => low.includes(part))) {
      throw new Error(`masked quantity '${key}' in ${frame.kind} payload`);
    }
  }
  if (frame.kind === "stimulus") {
    const points = frame.payload.points as Record<string, unknown>[];
    points.forEach((p, i) => {
      for (const key of Object.keys(p)) {
        if (key !== "offset" && key !== "intensity" && key !== "slot") {
          throw new Error(`stimulus point ${i} carries unexpected key '${key}'`);
        }
      }
    });
  }
}

export function parseStimulusPoints(frame: Frame): StimulusPoint[] {
  if (frame.kind !== "stimulus") {
    throw new Error("not a stimulus frame");
  }
  const raw = frame.payload.points as Record<string, unknown>[];
  return raw.map((p) => ({
    slot: (p.slot as number) ?? 0,
    offset: [(p.offset as number[])[0] ?? 0, (p.offset as number[])[1] ?? 0],
    intensity: p.intensity as number,
  }));
}
