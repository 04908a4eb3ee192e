"""Simulated participant: feel the circle on the palm, probe, descend, decide.

The agent never sees the cone. Each control cycle it (1) re-centres the palm
on the perceived circle, (2) physically probes a small set of offsets and
compares the perceived radius against a just-noticeable difference, (3) moves
one probe step in the direction that shrank the circle, and (4) declares
arrival after a run of probes in which nothing shrank. All motion runs
through a fixed-tick world in which the stimulus is computed from the
latency-delayed sensed hand position while the percept is evaluated at the
true palm position, so moving too fast genuinely loses the stimulus.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .cone import GuidanceCone
from .stm import CircleStimulus, FocusSchedule, sample_circle
from .tracking import HandSample, SensorModel, Trajectory, observe

DEFAULT_PALM_RADIUS_MM = 40.0

_TICK_S = 0.001
_RECORD_DT_S = 0.01
_MIN_Z_MM = 10.0


@dataclass(frozen=True)
class PalmModel:
    """Disk of skin that feels the stimulus, riding on the hand position.

    plane_tolerance is the axial reach of the focal spot: scheduled points
    further than this from the palm plane are not felt. It defaults to the
    palm radius, which matches the focus' axial extent at these apertures.
    """

    center: np.ndarray
    radius: float = DEFAULT_PALM_RADIUS_MM
    plane_tolerance: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.radius <= 0.0:
            raise ValueError("palm radius must be positive")

    @property
    def effective_plane_tolerance(self) -> float:
        return self.radius if self.plane_tolerance is None else self.plane_tolerance


@dataclass(frozen=True)
class Percept:
    """What one look at the stimulus tells the agent.

    felt_offsets are palm-local xy offsets of the scheduled points that land
    on the palm. With >= 3 felt points the circumcircle fit gives a radius
    and centre estimate; with exactly 2 only a direction cue remains; with
    fewer the stimulus is lost.
    """

    felt_indices: np.ndarray
    felt_offsets: np.ndarray
    est_radius: float | None
    est_center_offset: np.ndarray | None

    @property
    def felt_count(self) -> int:
        return len(self.felt_indices)

    @property
    def lost(self) -> bool:
        return self.felt_count < 2

    @property
    def center_cue(self) -> np.ndarray | None:
        """Best available palm-local direction to the circle centre."""
        if self.est_center_offset is not None:
            return self.est_center_offset
        if self.felt_count >= 1:
            return self.felt_offsets.mean(axis=0)
        return None


_EMPTY_PERCEPT = Percept(
    felt_indices=np.empty(0, dtype=int),
    felt_offsets=np.empty((0, 2)),
    est_radius=None,
    est_center_offset=None,
)


@dataclass(frozen=True)
class AgentParams:
    """Behavioural constants of the simulated participant.

    radius_jnd: smallest perceivable radius change, mm.
    probe_step: probe and stride length, mm.
    move_speed: hand speed, m/s (kept below the sensor-imposed 0.45 limit).
    settle_probes: how many consecutive no-direction probes mean "arrived".
    decision_timeout: give up after this many seconds.
    z_drift: magnitude of an uncontrolled vertical drift velocity, mm/s
        (sign seeded per run; 0 disables it).
    recall_noise: position-memory error used when retracing after a lost
        stimulus, mm (only exercised once the stimulus has been lost).
    recall_noise_growth: memory degradation factor per failed recovery
        attempt; wandering blind makes the retrace target less reliable.
    recenter_tol: centre offsets below this are not worth correcting, mm.
    """

    radius_jnd: float = 7.8
    probe_step: float = 50.0
    move_speed: float = 0.3
    settle_probes: int = 3
    decision_timeout: float = 30.0
    z_drift: float = 0.0
    recall_noise: float = 40.0
    recall_noise_growth: float = 1.5
    recenter_tol: float = 5.0


def fit_circle(points: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares circumcircle of >= 3 planar points: (center, radius).

    Exact when the points actually lie on one circle.
    """
    points = np.asarray(points, dtype=float)
    if points.shape[0] < 3:
        raise ValueError("need at least 3 points to fit a circle")
    a = np.column_stack([2.0 * points[:, 0], 2.0 * points[:, 1], np.ones(len(points))])
    b = (points ** 2).sum(axis=1)
    (cx, cy, c), *_ = np.linalg.lstsq(a, b, rcond=None)
    radius = math.sqrt(max(c + cx * cx + cy * cy, 0.0))
    return np.array([cx, cy]), radius


def perceive(schedule: FocusSchedule, palm: PalmModel) -> Percept:
    """Which scheduled points land on the palm, and what they imply.

    A point is felt when its xy offset from the palm centre is within the
    palm radius and the schedule plane is within the palm's plane tolerance.
    A plane mismatch beyond the tolerance yields an empty (lost) percept.
    """
    if abs(schedule.plane_z - palm.center[2]) > palm.effective_plane_tolerance:
        return _EMPTY_PERCEPT
    offsets = schedule.points[:, :2] - palm.center[:2]
    dist = np.hypot(offsets[:, 0], offsets[:, 1])
    mask = dist <= palm.radius
    idx = np.nonzero(mask)[0]
    felt = offsets[mask]
    if len(idx) >= 3:
        center, radius = fit_circle(felt)
        return Percept(felt_indices=idx, felt_offsets=felt,
                       est_radius=radius, est_center_offset=center)
    return Percept(felt_indices=idx, felt_offsets=felt,
                   est_radius=None, est_center_offset=None)


def settled_percept(cone: GuidanceCone, position: np.ndarray,
                    palm_radius: float = DEFAULT_PALM_RADIUS_MM,
                    n_points: int = 10, render_freq: float = 10.0) -> Percept:
    """Percept with the sensor fully caught up (stimulus computed at `position`)."""
    position = np.asarray(position, dtype=float)
    section = cone.cross_section(position)
    schedule = sample_circle(CircleStimulus(
        center=section.center, plane_z=section.plane_z, radius=section.radius,
        n_points=n_points, render_freq=render_freq))
    return perceive(schedule, PalmModel(center=position, radius=palm_radius))


@dataclass(frozen=True)
class ProbeOutcome:
    direction: np.ndarray | None  # unit vector, or None when nothing shrank
    lost: bool = False


def probe_directions_for(cone: GuidanceCone) -> tuple[np.ndarray, ...]:
    """Probe offsets: +-z for cones with height, +-x/+-y for flat ones."""
    if cone.is_projected:
        return (np.array([1.0, 0.0, 0.0]), np.array([-1.0, 0.0, 0.0]),
                np.array([0.0, 1.0, 0.0]), np.array([0.0, -1.0, 0.0]))
    return (np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, -1.0]))


def _best_direction(base_radius: float, candidates: Sequence[tuple[np.ndarray, Percept]],
                    jnd: float) -> np.ndarray | None:
    best_dir, best_dec = None, jnd
    for direction, percept in candidates:
        if percept.lost or percept.est_radius is None:
            continue
        dec = base_radius - percept.est_radius
        if dec > best_dec:
            best_dir, best_dec = direction, dec
    return best_dir


def probe_direction(cone: GuidanceCone, position: np.ndarray, params: AgentParams,
                    palm_radius: float = DEFAULT_PALM_RADIUS_MM,
                    n_points: int = 10, render_freq: float = 10.0) -> ProbeOutcome:
    """Evaluate the perceived radius around `position` with a settled sensor.

    Returns the unit direction whose radius decrease exceeds the JND, or no
    direction if every probe stays within it. A lost stimulus at the base
    position yields no direction with the lost flag set.
    """
    position = np.asarray(position, dtype=float)
    base = settled_percept(cone, position, palm_radius, n_points, render_freq)
    if base.lost or base.est_radius is None:
        return ProbeOutcome(direction=None, lost=True)
    candidates = []
    for d in probe_directions_for(cone):
        p = settled_percept(cone, position + params.probe_step * d,
                            palm_radius, n_points, render_freq)
        candidates.append((d, p))
    return ProbeOutcome(direction=_best_direction(base.est_radius, candidates,
                                                  params.radius_jnd))


def _as_outcome(entry) -> ProbeOutcome:
    if isinstance(entry, ProbeOutcome):
        return entry
    return ProbeOutcome(direction=entry)


def decide_reached(probe_history: Sequence, params: AgentParams,
                   lost: bool = False) -> bool:
    """Arrived: the last settle_probes probes all found nothing and we still feel it.

    History entries may be ProbeOutcome records, direction vectors or None.
    A probe that ended with the stimulus lost never counts toward arrival:
    losing the stimulus is grounds to search, not to declare success.
    """
    if lost:
        return False
    k = params.settle_probes
    if len(probe_history) < k:
        return False
    recent = [_as_outcome(p) for p in probe_history[-k:]]
    return all(p.direction is None and not p.lost for p in recent)


@dataclass
class PolicyResult:
    reached: bool
    elapsed: float
    final_position: np.ndarray
    samples: list[HandSample]
    lost_ticks: int
    probe_history: list[ProbeOutcome] = field(default_factory=list)


class _World:
    """Fixed-tick simulation: true hand motion, delayed sensing, percepts.

    Motion commands act on the agent's *believed* position; an uncontrolled
    vertical drift accumulates as an offset the agent cannot sense directly,
    so the true position is believed + (0, 0, drift). Everything physical
    (sensor, stimulus, percepts, recorded trajectory) uses the true position.
    """

    def __init__(self, cone: GuidanceCone, params: AgentParams, sensor: SensorModel,
                 palm_radius: float, n_points: int, render_freq: float,
                 rng: np.random.Generator, noise_seed: int) -> None:
        self.cone = cone
        self.params = params
        self.sensor = sensor
        self.palm_radius = palm_radius
        self.n_points = n_points
        self.render_freq = render_freq
        self.noise_seed = noise_seed
        self.t = 0.0
        self.pos = [float(v) for v in cone.start]  # believed
        self.drift_off = 0.0
        self.truth = Trajectory()
        self.truth.append(0.0, self.pos)
        self.speed_mm_s = params.move_speed * 1000.0
        sign = 1.0 if rng.random() < 0.5 else -1.0
        self.drift_mm_s = sign * params.z_drift
        self.last_good = tuple(self.pos)  # believed coordinates
        self.lost_ticks = 0
        self.samples: list[HandSample] = [HandSample(position=np.array(self.pos), timestamp=0.0)]
        self._next_record = _RECORD_DT_S
        self._frame_idx = -1
        self._circle_xy: list[tuple[float, float]] = []
        self._circle_plane = 0.0
        self._refresh_stimulus()
        self._felt_check()

    @property
    def settle_time(self) -> float:
        """Time for the pipeline and one full stimulus cycle to catch up."""
        return self.sensor.latency + self.sensor.frame_interval + 1.0 / self.render_freq + 0.01

    @property
    def position(self) -> tuple[float, float, float]:
        """Believed position: where the agent thinks it is."""
        return (self.pos[0], self.pos[1], self.pos[2])

    @property
    def true_position(self) -> tuple[float, float, float]:
        return (self.pos[0], self.pos[1], self.pos[2] + self.drift_off)

    def _refresh_stimulus(self) -> None:
        frame = int(math.floor(self.t * self.sensor.frame_rate))
        if frame == self._frame_idx:
            return
        self._frame_idx = frame
        sensed = observe(self.truth, self.t, self.sensor, self.noise_seed)
        section = self.cone.cross_section(sensed.position)
        schedule = sample_circle(CircleStimulus(
            center=section.center, plane_z=section.plane_z, radius=section.radius,
            n_points=self.n_points, render_freq=self.render_freq))
        self._circle_xy = [(float(p[0]), float(p[1])) for p in schedule.points]
        self._circle_plane = section.plane_z
        self._schedule = schedule

    def _felt_check(self) -> None:
        x, y, z = self.true_position
        count = 0
        sx = sy = 0.0
        if abs(self._circle_plane - z) <= self.palm_radius:
            r2 = self.palm_radius * self.palm_radius
            for (px, py) in self._circle_xy:
                dx = px - x
                dy = py - y
                if dx * dx + dy * dy <= r2:
                    count += 1
                    sx += dx
                    sy += dy
        self.felt_count = count
        if count:
            self.felt_centroid = (sx / count, sy / count)
        else:
            self.felt_centroid = (0.0, 0.0)
        if count >= 2:
            self.last_good = self.position
        else:
            self.lost_ticks += 1

    def _finish_tick(self) -> None:
        if self.drift_mm_s != 0.0:
            self.drift_off += self.drift_mm_s * _TICK_S
        self.truth.append(self.t, self.true_position)
        self._refresh_stimulus()
        self._felt_check()
        if self.t >= self._next_record:
            self.samples.append(HandSample(position=np.array(self.true_position), timestamp=self.t))
            self._next_record += _RECORD_DT_S

    def tick_wait(self) -> None:
        self.t += _TICK_S
        self._finish_tick()

    def tick_toward(self, target: tuple[float, float, float]) -> bool:
        """Advance one tick straight toward `target`; True on arrival."""
        self.t += _TICK_S
        dx = target[0] - self.pos[0]
        dy = target[1] - self.pos[1]
        dz = target[2] - self.pos[2]
        dist = math.sqrt(dx * dx + dy * dy + dz * dz)
        step = self.speed_mm_s * _TICK_S
        arrived = dist <= step
        if arrived:
            self.pos = [target[0], target[1], target[2]]
        else:
            f = step / dist
            self.pos[0] += dx * f
            self.pos[1] += dy * f
            self.pos[2] += dz * f
        self._finish_tick()
        return arrived

    def tick_tracked(self, axis: tuple[float, float, float], origin: tuple[float, float, float],
                     axial_goal: float) -> bool:
        """Advance one tick along `axis` while steering sideways to keep the
        felt pattern centred on the palm; True once the displacement along the
        axis reaches `axial_goal`. The steering uses only what the palm feels,
        never the cone itself.
        """
        self.t += _TICK_S
        step = self.speed_mm_s * _TICK_S
        ex, ey = (self.felt_centroid if self.felt_count >= 1 else (0.0, 0.0))
        # Steering acts only across the probe axis, never along it.
        ux, uy, uz = axis
        horiz = math.hypot(ux, uy)
        if horiz > 1e-12:
            along = (ex * ux + ey * uy) / (horiz * horiz)
            ex -= along * ux
            ey -= along * uy
        lat_err = math.hypot(ex, ey)
        lat_step = min(lat_err, 0.8 * step)
        ax_step = math.sqrt(step * step - lat_step * lat_step)
        if lat_err > 1e-12:
            self.pos[0] += ex / lat_err * lat_step
            self.pos[1] += ey / lat_err * lat_step
        self.pos[0] += ux * ax_step
        self.pos[1] += uy * ax_step
        self.pos[2] += uz * ax_step
        progress = ((self.pos[0] - origin[0]) * ux + (self.pos[1] - origin[1]) * uy
                    + (self.pos[2] - origin[2]) * uz)
        self._finish_tick()
        return progress >= axial_goal - 0.5 * step

    def measure(self) -> Percept:
        """Full percept right now: stimulus from the sensed (delayed) position,
        felt on the palm at the true position."""
        return perceive(self._schedule, PalmModel(center=np.array(self.true_position),
                                                  radius=self.palm_radius))


def _policy_script(world: _World, cone: GuidanceCone, params: AgentParams,
                   rng: np.random.Generator, history: list):
    """Behaviour program; yields ("wait", s) / ("move_to", p) / ("tracked_move", d) /
    ("move_by", d) / ("measure", None) commands and returns True on arrival.

    Probe and stride legs are tracked moves: the hand translates along the
    probe axis while drifting sideways to keep the felt pattern centred,
    which is how an oblique cone can be followed at all.
    """
    settle = world.settle_time
    step = params.probe_step
    dirs = probe_directions_for(cone)
    recovery_attempts = 0

    yield ("wait", settle)
    percept = yield ("measure", None)
    while True:
        if percept.lost:
            # Retrace toward the remembered last-good position. The memory is
            # imperfect and degrades with every failed attempt, so recovery is
            # possible but not guaranteed. Relocating voids any arrival streak.
            history.append(ProbeOutcome(direction=None, lost=True))
            sigma = params.recall_noise * params.recall_noise_growth ** min(recovery_attempts, 4)
            recovery_attempts += 1
            target = np.array(world.last_good) + rng.normal(0.0, sigma, 3)
            target[2] = max(target[2], _MIN_Z_MM)
            yield ("seek", tuple(target))
            yield ("wait", settle)
            percept = yield ("measure", None)
            continue
        recovery_attempts = 0

        cue = percept.center_cue
        if cue is not None and math.hypot(cue[0], cue[1]) > params.recenter_tol:
            yield ("move_by", (float(cue[0]), float(cue[1]), 0.0))
            yield ("wait", settle)
            percept = yield ("measure", None)
            if percept.lost:
                continue

        if percept.est_radius is None:
            # Too few points for a radius estimate and no useful centre cue.
            history.append(ProbeOutcome(direction=None, lost=False))
            if decide_reached(history, params, lost=percept.lost):
                return True
            yield ("wait", settle)
            percept = yield ("measure", None)
            continue

        base_radius = percept.est_radius
        base_pos = world.position
        candidates = []
        for d in dirs:
            yield ("tracked_move", (step * d[0], step * d[1], step * d[2]))
            yield ("wait", settle)
            probe_percept = yield ("measure", None)
            candidates.append((d, probe_percept))
            yield ("move_to", base_pos)
        yield ("wait", settle)
        percept = yield ("measure", None)
        if percept.lost:
            # Lost it on the way back: recover before judging anything.
            continue

        best = _best_direction(base_radius, candidates, params.radius_jnd)
        if best is not None:
            history.append(ProbeOutcome(direction=best, lost=False))
            yield ("tracked_move", (step * best[0], step * best[1], step * best[2]))
            yield ("wait", settle)
            percept = yield ("measure", None)
        else:
            history.append(ProbeOutcome(direction=None, lost=False))
            if decide_reached(history, params, lost=percept.lost):
                return True


def run_policy(cone: GuidanceCone, params: AgentParams | None = None,
               sensor: SensorModel | None = None,
               palm_radius: float = DEFAULT_PALM_RADIUS_MM,
               n_points: int = 10, render_freq: float = 10.0,
               seed: int = 0, timeout: float | None = None) -> PolicyResult:
    """Run one closed-loop guidance trial; deterministic for a given seed.

    The hand starts at the cone's start point and the loop ends when the
    agent decides it has arrived or `timeout` (default: the params' decision
    timeout) expires.
    """
    params = params or AgentParams()
    sensor = sensor or SensorModel()
    timeout = params.decision_timeout if timeout is None else timeout
    rng = np.random.default_rng(seed)
    world = _World(cone, params, sensor, palm_radius, n_points, render_freq,
                   rng, noise_seed=seed if isinstance(seed, int) else 0)
    history: list[ProbeOutcome] = []
    script = _policy_script(world, cone, params, rng, history)

    reached = False
    command = script.send(None)
    timed_out = False
    while not timed_out:
        kind, arg = command
        if kind == "measure":
            feedback = world.measure()
        else:
            if kind == "wait":
                deadline = world.t + arg
                while world.t < deadline:
                    if world.t >= timeout:
                        timed_out = True
                        break
                    world.tick_wait()
            elif kind == "tracked_move":
                length = math.sqrt(arg[0] ** 2 + arg[1] ** 2 + arg[2] ** 2)
                axis = (arg[0] / length, arg[1] / length, arg[2] / length)
                origin = world.position
                while True:
                    if world.t >= timeout:
                        timed_out = True
                        break
                    if world.tick_tracked(axis, origin, length):
                        break
            elif kind == "seek":
                # Sweep toward the remembered position; when the stimulus is
                # felt again, push on through it and settle in its middle.
                target = arg
                contact = None
                exit_point = None
                max_push = 2.0 * world.palm_radius
                while True:
                    if world.t >= timeout:
                        timed_out = True
                        break
                    arrived = world.tick_toward(target)
                    p = world.position
                    if contact is None:
                        if world.felt_count >= 2:
                            contact = p
                        if arrived:
                            break
                        continue
                    if world.felt_count < 2:
                        exit_point = p
                        break
                    pushed = math.dist(p, contact)
                    if arrived or pushed >= max_push:
                        break
                if not timed_out and contact is not None and exit_point is not None:
                    mid = ((contact[0] + exit_point[0]) / 2.0,
                           (contact[1] + exit_point[1]) / 2.0,
                           (contact[2] + exit_point[2]) / 2.0)
                    while world.t < timeout and not world.tick_toward(mid):
                        pass
                    if world.t >= timeout:
                        timed_out = True
            else:
                if kind == "move_by":
                    p = world.position
                    target = (p[0] + arg[0], p[1] + arg[1], p[2] + arg[2])
                else:
                    target = arg
                while True:
                    if world.t >= timeout:
                        timed_out = True
                        break
                    if world.tick_toward(target):
                        break
            feedback = None
        if timed_out:
            break
        try:
            command = script.send(feedback)
        except StopIteration as stop:
            reached = bool(stop.value)
            break

    if world.samples[-1].timestamp != world.t:
        world.samples.append(HandSample(position=np.array(world.true_position), timestamp=world.t))
    return PolicyResult(
        reached=reached,
        elapsed=world.t,
        final_position=np.array(world.true_position),
        samples=world.samples,
        lost_ticks=world.lost_ticks,
        probe_history=history,
    )
