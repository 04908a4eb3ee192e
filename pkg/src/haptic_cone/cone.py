"""Guidance-cone geometry: map the hand to the presented cross-section circle.

The virtual cone has its base circle (radius R) at the start point and its
apex at the goal. At any hand position a progress value is computed (1 at
the start, 0 at the goal) and the presented circle has radius
max(progress * R, r_min), centred on the line between start and goal.

Three cases:
  vertical  - goal straight above/below the start: the circle is concentric
              and lies in the hand's plane.
  oblique   - goal offset to the side as well: the circle still lies in the
              hand's plane but its centre slides toward the goal's xy.
  projected - start and goal share a plane: the oblique cone is flattened
              into that plane, progress is measured horizontally, and the
              circle stays at the shared height regardless of the hand.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_BASE_RADIUS_MM = 30.0
DEFAULT_MIN_RADIUS_MM = 5.0

# Below this start/goal height difference the flattened (projected) form is
# used; the vertical form would be hypersensitive to hand motion.
Z_PLANE_THRESHOLD_MM = 1.0


class DegenerateConeError(ValueError):
    """Start and goal coincide (or nearly so): no cone can be presented."""


@dataclass(frozen=True)
class CrossSection:
    """The circle presented for one hand position."""

    progress: float  # 1 at the start, 0 at the goal; may exceed 1 beyond the start
    center: tuple[float, float]  # mm
    plane_z: float  # mm
    radius: float  # mm, already clamped to the minimum


@dataclass(frozen=True)
class GuidanceCone:
    start: np.ndarray
    goal: np.ndarray
    base_radius: float = DEFAULT_BASE_RADIUS_MM
    min_radius: float = DEFAULT_MIN_RADIUS_MM

    def __post_init__(self) -> None:
        object.__setattr__(self, "start", np.asarray(self.start, dtype=float))
        object.__setattr__(self, "goal", np.asarray(self.goal, dtype=float))
        if self.start.shape != (3,) or self.goal.shape != (3,):
            raise ValueError("start and goal must be 3-vectors")
        if not (self.base_radius > self.min_radius > 0.0):
            raise ValueError("need base_radius > min_radius > 0")
        if np.array_equal(self.start, self.goal):
            raise DegenerateConeError("start and goal coincide")
        if self.is_projected and self._horizontal_span() <= 0.0:
            raise DegenerateConeError(
                "start and goal share a plane but have no horizontal separation"
            )
        self.start.setflags(write=False)
        self.goal.setflags(write=False)

    @property
    def is_projected(self) -> bool:
        """True when start and goal (nearly) share a z-plane."""
        return abs(self.start[2] - self.goal[2]) <= Z_PLANE_THRESHOLD_MM

    def _horizontal_span(self) -> float:
        return math.hypot(self.goal[0] - self.start[0], self.goal[1] - self.start[1])

    @property
    def path_length(self) -> float:
        return float(np.linalg.norm(self.goal - self.start))

    def progress(self, hand: np.ndarray) -> float:
        """Normalized remaining distance: 1 at the start, 0 at the goal.

        Measured along z when the cone has height, horizontally otherwise.
        No upper clamp: the circle keeps growing past the start.
        """
        hand = np.asarray(hand, dtype=float)
        if self.is_projected:
            num = math.hypot(self.goal[0] - hand[0], self.goal[1] - hand[1])
            return num / self._horizontal_span()
        return abs(self.goal[2] - hand[2]) / abs(self.goal[2] - self.start[2])

    def cross_section(self, hand: np.ndarray) -> CrossSection:
        """The circle presented when the hand is at `hand`.

        centre = progress * start_xy + (1 - progress) * goal_xy; the radius is
        progress * base_radius clamped below by min_radius. The circle lies in
        the hand's plane, except the projected case where it stays at the
        start/goal height.
        """
        hand = np.asarray(hand, dtype=float)
        k = self.progress(hand)
        cx = k * self.start[0] + (1.0 - k) * self.goal[0]
        cy = k * self.start[1] + (1.0 - k) * self.goal[1]
        radius = max(k * self.base_radius, self.min_radius)
        plane_z = self.start[2] if self.is_projected else float(hand[2])
        return CrossSection(progress=k, center=(float(cx), float(cy)),
                            plane_z=float(plane_z), radius=float(radius))

    def dead_zone_extent(self, direction: np.ndarray | None = None) -> float:
        """Path distance from the goal within which the radius stays clamped.

        Equals (min_radius / base_radius) * |goal - start|. If `direction` is
        given it must be parallel to the start-goal axis.
        """
        if direction is not None:
            d = np.asarray(direction, dtype=float)
            axis = self.goal - self.start
            cross = np.linalg.norm(np.cross(d, axis))
            norms = np.linalg.norm(d) * np.linalg.norm(axis)
            if norms == 0.0 or cross > 1e-9 * norms:
                raise ValueError("direction must be aligned with goal - start")
        return (self.min_radius / self.base_radius) * self.path_length

    def point_on_path(self, dist_from_goal: float) -> np.ndarray:
        """Point on the straight start-goal line at `dist_from_goal` mm from the goal."""
        u = (self.start - self.goal) / self.path_length
        return self.goal + dist_from_goal * u
