"""Hand sensor model: marker centroid, frame-rate sampling, pipeline latency.

The real sensor reports the centroid of three palm markers at 30 fps and the
whole sensing-to-stimulus pipeline lags by about 90 ms. `observe` reproduces
that: the reported position is the true trajectory evaluated one latency
before the last frame boundary, optionally with isotropic Gaussian noise.
"""
from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

DEFAULT_FRAME_RATE_HZ = 30.0
DEFAULT_LATENCY_S = 0.090


@dataclass(frozen=True)
class MarkerSet:
    """Three palm markers; the hand position is their centroid."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self) -> None:
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))

    @property
    def degenerate(self) -> bool:
        """True when the markers are (near-)collinear; centroid still works."""
        area2 = np.linalg.norm(np.cross(self.b - self.a, self.c - self.a))
        return bool(area2 < 1e-9)


def centroid(markers: MarkerSet) -> np.ndarray:
    """Arithmetic mean of the three marker positions."""
    return (markers.a + markers.b + markers.c) / 3.0


@dataclass(frozen=True)
class SensorModel:
    frame_rate: float = DEFAULT_FRAME_RATE_HZ  # Hz
    latency: float = DEFAULT_LATENCY_S  # seconds
    noise_std: float = 0.0  # mm, isotropic

    @property
    def frame_interval(self) -> float:
        return 1.0 / self.frame_rate


@dataclass(frozen=True)
class HandSample:
    position: np.ndarray  # mm
    timestamp: float  # seconds

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))


class Trajectory:
    """Time-indexed hand path; linear interpolation, clamped at the ends.

    Timestamps must be appended strictly increasing.
    """

    def __init__(self) -> None:
        self._times: list[float] = []
        self._points: list[tuple[float, float, float]] = []

    def __len__(self) -> int:
        return len(self._times)

    @property
    def start_time(self) -> float:
        return self._times[0]

    @property
    def end_time(self) -> float:
        return self._times[-1]

    def append(self, t: float, position: Sequence[float]) -> None:
        if self._times and t <= self._times[-1]:
            raise ValueError("timestamps must be strictly increasing")
        self._times.append(float(t))
        self._points.append((float(position[0]), float(position[1]), float(position[2])))

    def position_at(self, t: float) -> np.ndarray:
        if not self._times:
            raise ValueError("trajectory is empty")
        if t <= self._times[0]:
            return np.array(self._points[0])
        if t >= self._times[-1]:
            return np.array(self._points[-1])
        i = bisect_right(self._times, t)
        t0, t1 = self._times[i - 1], self._times[i]
        p0, p1 = self._points[i - 1], self._points[i]
        w = (t - t0) / (t1 - t0)
        return np.array([p0[j] + w * (p1[j] - p0[j]) for j in range(3)])

    def samples(self) -> list[HandSample]:
        return [HandSample(position=np.array(p), timestamp=t)
                for t, p in zip(self._times, self._points)]

    @classmethod
    def from_samples(cls, samples: Iterable[HandSample]) -> "Trajectory":
        traj = cls()
        for s in samples:
            traj.append(s.timestamp, s.position)
        return traj


def observe(trajectory: Trajectory, t: float, model: SensorModel = SensorModel(),
            seed: int = 0) -> HandSample:
    """What the sensor pipeline reports at query time t.

    The report corresponds to the last frame boundary before t, evaluated one
    latency earlier on the true path; before the pipeline fills (t < latency)
    the initial position is held. Noise, when enabled, is drawn per frame from
    a seed-derived stream, so repeated queries within a frame are identical
    and runs are bit-reproducible.
    """
    if t < 0.0:
        raise ValueError("t must be non-negative")
    frame_index = int(math.floor(t * model.frame_rate))
    t_frame = frame_index / model.frame_rate
    t_delayed = t_frame - model.latency
    if t_delayed <= trajectory.start_time:
        position = trajectory.position_at(trajectory.start_time)
    else:
        position = trajectory.position_at(t_delayed)
    if model.noise_std > 0.0:
        rng = np.random.default_rng([seed, frame_index])
        position = position + rng.normal(0.0, model.noise_std, size=3)
    return HandSample(position=position, timestamp=t_frame)


def write_trajectory_jsonl(samples: Iterable[HandSample], path: str | Path,
                           extra: dict | None = None) -> int:
    """One JSON object per line: {"t": float, "position": [x, y, z], **extra}."""
    n = 0
    with open(path, "w") as fh:
        for s in samples:
            row = dict(extra or {})
            row["t"] = s.timestamp
            row["position"] = [float(v) for v in s.position]
            fh.write(json.dumps(row, sort_keys=True) + "\n")
            n += 1
    return n


def read_trajectory_jsonl(path: str | Path) -> list[dict]:
    """Parsed rows of a trajectory JSON-lines file."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows
