/**
 * Thin websocket wrapper: stamps outgoing sequence numbers, decodes and
 * dispatches incoming frames. The socket is injectable for tests.
 */

import { decodeFrame, encodeFrame, type Frame, type FrameKind } from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((event: { data: string }) => void) | null;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onerror: ((event: unknown) => void) | null;
}

export class TrialClient {
  private socket: SocketLike;
  private outSeq = 0;
  onFrame: ((frame: Frame) => void) | null = null;
  onOpen: (() => void) | null = null;
  onClose: (() => void) | null = null;

  constructor(socket: SocketLike) {
    this.socket = socket;
    socket.onopen = () => this.onOpen?.();
    socket.onclose = () => this.onClose?.();
    socket.onmessage = (event) => {
      const frame = decodeFrame(event.data);
      this.onFrame?.(frame);
    };
  }

  send(kind: FrameKind, payload: Record<string, unknown> = {}): void {
    const frame: Frame = { kind, seq: this.outSeq, payload };
    this.outSeq += 1;
    this.socket.send(encodeFrame(frame));
  }

  hello(): void {
    this.send("hello");
  }

  startTrial(): void {
    this.send("start_trial");
  }

  move(delta: [number, number, number]): void {
    this.send("hand_move", { delta });
  }

  reached(): void {
    this.send("reached");
  }

  abort(reason: string): void {
    this.send("abort", { reason });
  }

  close(): void {
    this.socket.close();
  }
}

export function connectWebSocket(url: string): TrialClient {
  return new TrialClient(new WebSocket(url) as unknown as SocketLike);
}
