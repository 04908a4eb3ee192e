"""Session engine and service that let a human run the guidance task.

The human replaces the simulated agent: hand_move frames steer a virtual
hand, the server streams palm-local stimulus frames at the sensor frame rate
(with the full sensing latency applied), and a reached frame ends the trial.
The engine is a deterministic state machine driven by an explicit clock; the
websocket layer feeds it wall-clock time for live sessions or client-scripted
time for reproducible ones. Trial metrics go through the same code path as
the offline experiment harness.
"""
from __future__ import annotations

import asyncio
import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .acoustics import Medium, focus_gain
from .agent import PalmModel, perceive
from .array_geometry import TransducerArray, build_array, default_layout
from .cone import GuidanceCone
from .experiment import (ExperimentConfig, Goal, result_from_trajectory,
                         trial_seed)
from .stm import CircleStimulus, focus_index_at_time, sample_circle
from .tracking import Trajectory, observe
from .wire import DecodeError, WireMessage, decode_frame, encode_frame

PROTOCOL_VERSION = 1
DEFAULT_MAX_SPEED_M_S = 0.45


@dataclass(frozen=True)
class ServerConfig:
    experiment: ExperimentConfig = field(default_factory=lambda: replace(ExperimentConfig(), sets=1))
    max_speed: float = DEFAULT_MAX_SPEED_M_S
    idle_timeout: float = 600.0
    scripted: bool = False
    physical_intensity: bool = True
    log_dir: Path | None = None


class SessionEngine:
    """One client session: a seeded sequence of trials over the goal set.

    All behaviour is a function of (config, session seed, message sequence,
    explicit clock), so a scripted session transcript is reproducible.
    """

    def __init__(self, config: ServerConfig, session_id: str = "s0",
                 seed: int | None = None,
                 array: TransducerArray | None = None) -> None:
        self.config = config
        self.exp = config.experiment
        self.session_id = session_id
        self.seed = self.exp.seed if seed is None else seed
        self.state = "idle"
        self.t = 0.0
        self.out_seq = 0
        self.in_seq = -1
        self.last_msg_t = 0.0
        self.transcript: list[tuple[str, WireMessage]] = []
        self.goals = self.exp.goal_list()
        self.trial_order: list[tuple[int, Goal]] = []  # (set_index, goal)
        for set_index in range(1, self.exp.sets + 1):
            rng = np.random.default_rng([self.seed, set_index])
            for idx in rng.permutation(len(self.goals)):
                self.trial_order.append((set_index, self.goals[idx]))
        self.trial_idx = 0
        self.trial_running = False
        self.trial_start = 0.0
        self.trial_t0_len = 0  # transcript offset of the running trial
        self.truth: Trajectory | None = None
        self.hand: np.ndarray | None = None
        self.cone: GuidanceCone | None = None
        self.goal: Goal | None = None
        self._next_frame = 0
        self._medium = Medium()
        if config.physical_intensity:
            self._array = array if array is not None else build_array(default_layout())
        else:
            self._array = None

    # -- outgoing ---------------------------------------------------------

    def _emit(self, kind: str, payload: dict) -> WireMessage:
        msg = WireMessage(kind=kind, seq=self.out_seq, payload=payload)
        self.out_seq += 1
        self.transcript.append(("out", msg))
        return msg

    def _abort(self, reason: str) -> list[WireMessage]:
        self.state = "finished"
        self.trial_running = False
        return [self._emit("abort", {"reason": reason})]

    # -- clock ------------------------------------------------------------

    def advance_to(self, t: float) -> list[WireMessage]:
        """Advance the session clock, emitting due stimulus frames and
        enforcing the trial and idle timeouts."""
        out: list[WireMessage] = []
        if t < self.t:
            return out
        if self.state != "finished" and t - self.last_msg_t > self.config.idle_timeout:
            self.t = t
            return self._abort("idle timeout")
        while self.trial_running:
            frame_t = self._next_frame / self.exp.sensor.frame_rate
            trial_deadline = self.trial_start + self.exp.timeout
            if self.trial_start + frame_t > t and trial_deadline > t:
                break
            if self.trial_start + frame_t >= trial_deadline:
                self.t = trial_deadline
                out.append(self._finish_trial(completed=False))
                break
            self.t = self.trial_start + frame_t
            out.append(self._stimulus_frame(frame_t))
            self._next_frame += 1
        self.t = max(self.t, t)
        return out

    # -- incoming ---------------------------------------------------------

    def handle(self, msg: WireMessage) -> list[WireMessage]:
        """Apply one client frame at the current clock; returns replies."""
        if self.state == "finished":
            return []
        if msg.seq <= self.in_seq:
            return self._abort(f"sequence number {msg.seq} not increasing")
        self.in_seq = msg.seq
        self.last_msg_t = self.t
        self.transcript.append(("in", msg))
        if msg.kind == "hello":
            return [self._emit("hello", {
                "session": self.session_id,
                "protocol": PROTOCOL_VERSION,
                "trial_count": len(self.trial_order),
                "sets": self.exp.sets,
                "timeout_s": self.exp.timeout,
                "palm_radius_mm": self.exp.palm_radius,
                "max_speed_m_s": self.config.max_speed,
                "n_points": self.exp.n_points,
                "render_freq": self.exp.render_freq,
            })]
        if msg.kind == "start_trial":
            if self.trial_running:
                return self._abort("trial already running")
            if self.trial_idx >= len(self.trial_order):
                return self._abort("no trials left")
            return [self._start_trial()]
        if msg.kind == "hand_move":
            if not self.trial_running:
                return []
            delta = msg.payload["delta"]
            self.hand = self.hand + np.asarray(delta, dtype=float)
            trial_t = self.t - self.trial_start
            if trial_t <= self.truth.end_time:
                trial_t = self.truth.end_time + 1e-9
            self.truth.append(trial_t, self.hand)
            return []
        if msg.kind == "reached":
            if not self.trial_running:
                return []
            return [self._finish_trial(completed=True)]
        if msg.kind == "abort":
            return self._abort("client abort")
        return self._abort(f"unexpected frame kind {msg.kind!r}")

    # -- trial lifecycle ---------------------------------------------------

    def _start_trial(self) -> WireMessage:
        set_index, goal = self.trial_order[self.trial_idx]
        self.state = "running"
        self.trial_running = True
        self.trial_start = self.t
        self.trial_t0_len = len(self.transcript)
        self.goal = goal
        self.cone = self.exp.cone_for(goal)
        self.hand = np.array(self.exp.workspace.start_point, dtype=float)
        self.truth = Trajectory()
        self.truth.append(0.0, self.hand)
        self._next_frame = 0
        return self._emit("start_trial", {
            "trial_index": self.trial_idx + 1,
            "trial_count": len(self.trial_order),
            "set": set_index,
        })

    def _finish_trial(self, completed: bool) -> WireMessage:
        set_index, goal = self.trial_order[self.trial_idx]
        duration = (self.t - self.trial_start) if completed else self.exp.timeout
        samples = self.truth.samples()
        seed = trial_seed(self.seed, set_index, goal.goal_id)
        result = result_from_trajectory(self.cone, goal, samples, completed,
                                        duration, set_index=set_index, seed=seed)
        self.trial_running = False
        self.trial_idx += 1
        if self.trial_idx >= len(self.trial_order):
            self.state = "finished"
        else:
            self.state = "running"
        frame = self._emit("trial_result", {
            "goal_id": result.goal_id,
            "trial_index": self.trial_idx,
            "set": set_index,
            "completed": result.completed,
            "eps_xyz": result.eps_xyz,
            "eps_xy": result.eps_xy,
            "duration": result.duration,
            "seed": seed,
        })
        self._write_trial_log(result)
        return frame

    # -- stimulus ----------------------------------------------------------

    def _stimulus_frame(self, trial_t: float) -> WireMessage:
        sensed = observe(self.truth, trial_t, self.exp.sensor,
                         seed=trial_seed(self.seed, 0, self.goal.goal_id))
        section = self.cone.cross_section(sensed.position)
        schedule = sample_circle(CircleStimulus(
            center=section.center, plane_z=section.plane_z, radius=section.radius,
            n_points=self.exp.n_points, render_freq=self.exp.render_freq))
        palm_center = self.truth.position_at(trial_t)
        percept = perceive(schedule, PalmModel(center=palm_center,
                                               radius=self.exp.palm_radius))
        points = []
        for slot, offset in zip(percept.felt_indices, percept.felt_offsets):
            intensity = 1.0
            if self._array is not None:
                focal = schedule.points[slot]
                eval_point = np.array([focal[0], focal[1], palm_center[2]])
                if eval_point[2] > 0:
                    intensity = focus_gain(self._array, focal, eval_point, self._medium)
            points.append({"slot": int(slot),
                           "offset": [float(offset[0]), float(offset[1])],
                           "intensity": float(intensity)})
        return self._emit("stimulus", {
            "t": trial_t,
            "points": points,
            "active_slot": focus_index_at_time(schedule, trial_t),
        })

    # -- logging -----------------------------------------------------------

    def _write_trial_log(self, result) -> None:
        if self.config.log_dir is None:
            return
        log_dir = Path(self.config.log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        path = log_dir / f"session-{self.session_id}-trial-{self.trial_idx:02d}.jsonl"
        with open(path, "w") as fh:
            for direction, msg in self.transcript[self.trial_t0_len:]:
                fh.write(json.dumps({"dir": direction, "frame": {
                    "kind": msg.kind, "seq": msg.seq, "payload": msg.payload,
                }}, sort_keys=True) + "\n")


def create_app(config: ServerConfig, static_dir: Path | None = None):
    """FastAPI application exposing the session protocol at /ws.

    In scripted mode the client drives the clock with a "t" (absolute,
    seconds) or "dt" payload field; otherwise wall-clock time rules and a
    30 Hz ticker streams stimulus frames between messages.
    """
    app = FastAPI(title="haptic-cone trial service")
    shared_array = build_array(default_layout()) if config.physical_intensity else None
    session_counter = {"n": 0}

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok"}

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket):
        await websocket.accept()
        session_counter["n"] += 1
        engine = SessionEngine(config, session_id=f"s{session_counter['n']}",
                               array=shared_array)
        send_lock = asyncio.Lock()
        t0 = time.monotonic()
        stop = asyncio.Event()

        async def send_frames(frames):
            async with send_lock:
                for frame in frames:
                    await websocket.send_text(encode_frame(frame))

        async def ticker():
            interval = 1.0 / config.experiment.sensor.frame_rate
            try:
                while not stop.is_set():
                    await asyncio.sleep(interval)
                    frames = engine.advance_to(time.monotonic() - t0)
                    if frames:
                        await send_frames(frames)
            except Exception:
                pass

        ticker_task = None
        if not config.scripted:
            ticker_task = asyncio.create_task(ticker())
        try:
            while True:
                text = await websocket.receive_text()
                try:
                    msg = decode_frame(text)
                except DecodeError as exc:
                    await send_frames(engine._abort(f"decode error: {exc} (field {exc.field!r})"))
                    break
                if config.scripted:
                    payload_t = msg.payload.get("t")
                    payload_dt = msg.payload.get("dt")
                    if payload_t is not None:
                        target_t = float(payload_t)
                    elif payload_dt is not None:
                        target_t = engine.t + float(payload_dt)
                    else:
                        target_t = engine.t
                else:
                    target_t = time.monotonic() - t0
                frames = engine.advance_to(target_t)
                frames += engine.handle(msg)
                await send_frames(frames)
                if engine.state == "finished" and not engine.trial_running:
                    break
        except WebSocketDisconnect:
            pass
        finally:
            stop.set()
            if ticker_task is not None:
                ticker_task.cancel()

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app


def run_server(config: ServerConfig, host: str = "127.0.0.1", port: int = 8765,
               static_dir: Path | None = None) -> None:
    import uvicorn

    uvicorn.run(create_app(config, static_dir=static_dir), host=host, port=port)
