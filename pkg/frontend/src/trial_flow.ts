/**
 * Session state machine: connect, run trials until the set completes, and
 * collect per-trial result records for the downloadable CSV (same column
 * schema as the offline experiment exports).
 */

import { assertMasked, type Frame } from "./protocol.js";

export type FlowState = "disconnected" | "connected" | "running" | "finished" | "aborted";

export interface SessionInfo {
  session: string;
  trialCount: number;
  timeoutS: number;
  palmRadiusMm: number;
  maxSpeedMS: number;
}

export interface TrialRecord {
  goal_id: number;
  set: number;
  completed: boolean;
  eps_xyz: number;
  eps_xy: number;
  duration: number;
  seed: number;
}

export const CSV_HEADER = "goal_id,set,completed,eps_xyz,eps_xy,duration,seed";

export class TrialFlow {
  state: FlowState = "disconnected";
  info: SessionInfo | undefined;
  trialIndex = 0;
  records: TrialRecord[] = [];
  abortReason: string | undefined;
  private lastServerSeq = -1;

  /**
   * Apply one server frame (after masking validation). Returns the frame
   * kind so callers can react.
   */
  handleFrame(frame: Frame): string {
    if (frame.seq <= this.lastServerSeq) {
      throw new Error(`server sequence went backwards: ${frame.seq}`);
    }
    this.lastServerSeq = frame.seq;
    assertMasked(frame);
    const p = frame.payload;
    switch (frame.kind) {
      case "hello":
        this.info = {
          session: String(p.session ?? ""),
          trialCount: Number(p.trial_count ?? 0),
          timeoutS: Number(p.timeout_s ?? 30),
          palmRadiusMm: Number(p.palm_radius_mm ?? 40),
          maxSpeedMS: Number(p.max_speed_m_s ?? 0.45),
        };
        this.state = "connected";
        break;
      case "start_trial":
        this.trialIndex = Number(p.trial_index ?? this.trialIndex + 1);
        this.state = "running";
        break;
      case "trial_result": {
        this.records.push({
          goal_id: Number(p.goal_id),
          set: Number(p.set),
          completed: Boolean(p.completed),
          eps_xyz: Number(p.eps_xyz),
          eps_xy: Number(p.eps_xy),
          duration: Number(p.duration),
          seed: Number(p.seed ?? 0),
        });
        const total = this.info?.trialCount ?? Infinity;
        this.state = this.records.length >= total ? "finished" : "connected";
        break;
      }
      case "abort":
        this.abortReason = String(p.reason ?? "unknown");
        this.state = "aborted";
        break;
      case "stimulus":
        break;
      default:
        throw new Error(`unexpected server frame kind '${frame.kind}'`);
    }
    return frame.kind;
  }

  completedCount(): number {
    return this.records.filter((r) => r.completed).length;
  }

  /** CSV matching the offline exporter's per-trial table. */
  toCsv(): string {
    const lines = [CSV_HEADER];
    for (const r of this.records) {
      lines.push([
        r.goal_id,
        r.set,
        r.completed ? "true" : "false",
        r.eps_xyz,
        r.eps_xy,
        r.duration,
        r.seed,
      ].join(","));
    }
    return lines.join("\n") + "\n";
  }
}
