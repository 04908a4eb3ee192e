"""Spatio-temporal modulation: sample the presented circle into focal points.

A single constant-amplitude focus is stepped around the circle: N points at
a switching rate f_s = f * N, so the full circle is drawn f times per second.
Defaults are N = 10 points at f = 10 Hz (f_s = 100 Hz, 10 ms per dwell).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_N_POINTS = 10
DEFAULT_RENDER_FREQ_HZ = 10.0


@dataclass(frozen=True)
class CircleStimulus:
    """The circle to render and its sampling parameters."""

    center: tuple[float, float]
    plane_z: float
    radius: float
    n_points: int = DEFAULT_N_POINTS
    render_freq: float = DEFAULT_RENDER_FREQ_HZ

    def __post_init__(self) -> None:
        if self.radius <= 0.0:
            raise ValueError("radius must be positive")
        if self.n_points < 3:
            raise ValueError("need at least 3 sample points")
        if self.render_freq <= 0.0:
            raise ValueError("render frequency must be positive")

    @property
    def sample_freq(self) -> float:
        """Focus switching rate in Hz (f_s = f * N)."""
        return self.render_freq * self.n_points


@dataclass(frozen=True)
class FocusSchedule:
    """Ordered focal points and the dwell time spent on each."""

    points: np.ndarray  # (N, 3) mm
    dwell: float  # seconds per point

    def __post_init__(self) -> None:
        self.points.setflags(write=False)

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def period(self) -> float:
        """Duration of one full circle, seconds."""
        return self.dwell * self.n_points

    @property
    def plane_z(self) -> float:
        return float(self.points[0, 2])


def sample_circle(stim: CircleStimulus) -> FocusSchedule:
    """Place N points counter-clockwise around the circle, starting on +x.

    point_i = center + radius * (cos(2 pi i / N), sin(2 pi i / N)) at plane_z.
    """
    i = np.arange(stim.n_points)
    angles = 2.0 * np.pi * i / stim.n_points
    points = np.column_stack([
        stim.center[0] + stim.radius * np.cos(angles),
        stim.center[1] + stim.radius * np.sin(angles),
        np.full(stim.n_points, stim.plane_z),
    ])
    return FocusSchedule(points=points, dwell=1.0 / stim.sample_freq)


def focus_index_at_time(schedule: FocusSchedule, t: float) -> int:
    """Index of the active focus at time t >= 0 (piecewise constant)."""
    if t < 0.0:
        raise ValueError("t must be non-negative")
    return int(math.floor(t / schedule.dwell)) % schedule.n_points


def focus_at_time(schedule: FocusSchedule, t: float) -> np.ndarray:
    """Active focal point at time t; wraps around every full circle."""
    return schedule.points[focus_index_at_time(schedule, t)]
