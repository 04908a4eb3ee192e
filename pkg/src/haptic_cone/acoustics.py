"""Focusing phases and the pressure / radiation-pressure field of the array.

Each emitter is a monopole point source with 1/r amplitude decay and no
directivity; distances are in millimetres and pressure is in arbitrary
linear units. Radiation pressure is |pressure|^2 (unit constant), which is
all the downstream perception model needs: only relative stimulus strength
matters.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .array_geometry import TransducerArray

TWO_PI = 2.0 * np.pi

# Chunk size for grid scans; keeps the (points x emitters) broadcast ~40 MB.
_SCAN_CHUNK = 1024


class FieldSingularityError(ValueError):
    """Field requested exactly at an emitter position (1/r blows up)."""


class DegenerateProfileError(ValueError):
    """Lateral profile has no focal lobe within the scan window."""


@dataclass(frozen=True)
class Medium:
    """Propagation medium; defaults are air at 40 kHz (wavelength 8.5 mm)."""

    sound_speed: float = 340.0  # m/s
    frequency: float = 40_000.0  # Hz

    @property
    def wavelength(self) -> float:
        """Wavelength in mm."""
        return self.sound_speed / self.frequency * 1000.0


@dataclass(frozen=True)
class FieldSample:
    point: np.ndarray
    pressure: complex

    @property
    def radiation_pressure(self) -> float:
        return abs(self.pressure) ** 2


def focus_phases(array: TransducerArray, focal_point: np.ndarray,
                 medium: Medium = Medium()) -> np.ndarray:
    """Per-emitter phases (radians in [0, 2pi)) that focus at `focal_point`.

    phase_t = (-2 pi * |focal - position_t| / wavelength) mod 2 pi, so every
    contribution arrives in phase at the focus.
    """
    focal_point = np.asarray(focal_point, dtype=float)
    if focal_point[2] <= 0.0:
        raise ValueError("focal point must lie above the array plane (z > 0)")
    dist = np.linalg.norm(focal_point - array.positions, axis=1)
    return (-TWO_PI * dist / medium.wavelength) % TWO_PI


def pressure_at_points(array: TransducerArray, phases: np.ndarray,
                       points: np.ndarray, medium: Medium = Medium()) -> np.ndarray:
    """Complex pressure at many points, chunked to bound memory.

    points: (m, 3) mm. Returns (m,) complex. Raises FieldSingularityError if
    any point coincides with an emitter.
    """
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (len(array),):
        raise ValueError("phase vector length must match transducer count")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    k = TWO_PI / medium.wavelength
    out = np.empty(len(points), dtype=complex)
    for lo in range(0, len(points), _SCAN_CHUNK):
        chunk = points[lo:lo + _SCAN_CHUNK]
        r = np.linalg.norm(chunk[:, None, :] - array.positions[None, :, :], axis=2)
        if np.any(r < 1e-9):
            raise FieldSingularityError("field point coincides with a transducer")
        terms = (array.amplitudes[None, :] / r) * np.exp(1j * (k * r + phases[None, :]))
        out[lo:lo + _SCAN_CHUNK] = terms.sum(axis=1)
    return out


def field_at(array: TransducerArray, phases: np.ndarray, point: np.ndarray,
             medium: Medium = Medium()) -> FieldSample:
    """Superposed complex pressure at one point above the array.

    pressure = sum_t (amplitude_t / r_t) exp(i (2 pi r_t / wavelength + phase_t))
    with r_t the emitter distance in mm.
    """
    point = np.asarray(point, dtype=float)
    if point[2] <= 0.0:
        raise ValueError("field point must lie above the array plane (z > 0)")
    pressure = pressure_at_points(array, phases, point[None, :], medium)[0]
    return FieldSample(point=point, pressure=complex(pressure))


def focus_gain(array: TransducerArray, focal_point: np.ndarray, eval_point: np.ndarray,
               medium: Medium = Medium()) -> float:
    """Radiation pressure at `eval_point` relative to the focus itself, in [0, 1]."""
    phases = focus_phases(array, focal_point, medium)
    p = pressure_at_points(array, phases,
                           np.vstack([np.asarray(eval_point, float),
                                      np.asarray(focal_point, float)]), medium)
    ref = abs(p[1]) ** 2
    if ref == 0.0:
        return 0.0
    return min(1.0, abs(p[0]) ** 2 / ref)


def scan_lateral_line(array: TransducerArray, phases: np.ndarray, focal_point: np.ndarray,
                      medium: Medium = Medium(), axis: int = 0,
                      half_span: float = 30.0, step: float = 0.1) -> tuple[np.ndarray, np.ndarray]:
    """Radiation pressure along a lateral line through `focal_point`.

    Returns (offsets, radiation_pressure); axis 0 scans along x, 1 along y.
    """
    offsets = np.arange(-half_span, half_span + step / 2.0, step)
    points = np.tile(np.asarray(focal_point, dtype=float), (len(offsets), 1))
    points[:, axis] += offsets
    pressure = pressure_at_points(array, phases, points, medium)
    return offsets, np.abs(pressure) ** 2


def focal_spot_width(array: TransducerArray, focal_point: np.ndarray,
                     medium: Medium = Medium(), axis: int = 0,
                     half_span: float = 30.0, step: float = 0.1) -> float:
    """Full width at half maximum of the central radiation-pressure lobe, mm.

    Samples a lateral line through the focus at `step` resolution and walks
    outward from the peak; sidelobes outside the central lobe are ignored.
    Raises DegenerateProfileError when the half-maximum level is never
    crossed inside the window (no focal lobe, e.g. a single emitter).
    """
    offsets, rp = scan_lateral_line(array, focus_phases(array, focal_point, medium),
                                    focal_point, medium, axis, half_span, step)
    peak = int(np.argmax(rp))
    half = rp[peak] / 2.0
    left = peak
    while left > 0 and rp[left - 1] >= half:
        left -= 1
    right = peak
    while right < len(rp) - 1 and rp[right + 1] >= half:
        right += 1
    if left == 0 or right == len(rp) - 1:
        raise DegenerateProfileError(
            f"no half-maximum crossing within +/-{half_span} mm; profile has no focal lobe"
        )
    return offsets[right] - offsets[left]


def grid_points(center: np.ndarray, half_span: float, step: float,
                axes: tuple[int, ...] = (0, 1, 2)) -> np.ndarray:
    """Regular grid of sample points centred on `center` (mm), as (m, 3)."""
    center = np.asarray(center, dtype=float)
    offsets = np.arange(-half_span, half_span + step / 2.0, step)
    coords = [center[i] + (offsets if i in axes else np.array([0.0])) for i in range(3)]
    xg, yg, zg = np.meshgrid(*coords, indexing="ij")
    return np.column_stack([xg.ravel(), yg.ravel(), zg.ravel()])


def dump_field_csv(array: TransducerArray, focal_point: np.ndarray, path: str | Path,
                   medium: Medium = Medium(), half_span: float = 20.0, step: float = 1.0,
                   axes: tuple[int, ...] = (0, 1, 2)) -> int:
    """Write a grid scan around `focal_point` as CSV rows x,y,z,|p|,|p|^2.

    Returns the number of sample rows written.
    """
    phases = focus_phases(array, focal_point, medium)
    points = grid_points(focal_point, half_span, step, axes)
    pressure = pressure_at_points(array, phases, points, medium)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "z", "abs_pressure", "radiation_pressure"])
        for pt, p in zip(points, pressure):
            mag = float(abs(p))
            writer.writerow([repr(float(pt[0])), repr(float(pt[1])), repr(float(pt[2])),
                             repr(mag), repr(mag * mag)])
    return len(points)
