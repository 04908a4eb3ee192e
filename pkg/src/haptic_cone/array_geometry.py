"""Emitter aperture construction and the workspace coordinate frame.

The aperture is a tiling of rectangular transducer units on the z = 0 plane.
The x and y axes lie on the array surface and z points up into the workspace,
so every emitter sits at z = 0 with its normal along +z. A unit is referenced
by the centre of its footprint; its transducer grid is centred on that point.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# Per-unit transducer grid: 18 columns x 14 rows at the standard 40 kHz pitch.
# The unit footprint is sized so a 2x3 tiling spans 410.0 x 454.2 mm.
TRANSDUCER_PITCH_MM = 10.16
UNIT_COLS = 18
UNIT_ROWS = 14
UNIT_SIZE_MM = (205.0, 151.4)

DEFAULT_START_HEIGHT_MM = 400.0
DEFAULT_HALF_EXTENT_MM = 150.0


class LayoutError(ValueError):
    """Raised for geometrically impossible array layouts."""


@dataclass(frozen=True)
class UnitGrid:
    """Transducer grid shared by every unit: `cols` along x, `rows` along y."""

    rows: int = UNIT_ROWS
    cols: int = UNIT_COLS
    pitch: float = TRANSDUCER_PITCH_MM


@dataclass(frozen=True)
class ArrayLayout:
    """Unit placement (footprint centres) plus the shared transducer grid."""

    unit_origins: tuple[tuple[float, float], ...]
    unit_size: tuple[float, float] = UNIT_SIZE_MM
    grid: UnitGrid = field(default_factory=UnitGrid)

    @property
    def bounding_box(self) -> tuple[float, float]:
        """(width, height) of the union of unit footprints, mm."""
        if not self.unit_origins:
            raise LayoutError("layout has no units")
        xs = [o[0] for o in self.unit_origins]
        ys = [o[1] for o in self.unit_origins]
        w, h = self.unit_size
        return (max(xs) - min(xs) + w, max(ys) - min(ys) + h)

    @property
    def transducer_count(self) -> int:
        return len(self.unit_origins) * self.grid.rows * self.grid.cols


@dataclass(frozen=True)
class TransducerArray:
    """All emitters of the aperture.

    positions: (n, 3) mm, z = 0 for every emitter.
    normals: (n, 3) unit vectors (+z).
    amplitudes: (n,) drive levels in [0, 1].
    """

    positions: np.ndarray
    normals: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        for arr in (self.positions, self.normals, self.amplitudes):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return self.positions.shape[0]

    def with_amplitudes(self, amplitudes: np.ndarray) -> "TransducerArray":
        amplitudes = np.asarray(amplitudes, dtype=float).copy()
        if amplitudes.shape != (len(self),):
            raise ValueError("amplitude vector length must match transducer count")
        if np.any(amplitudes < 0.0) or np.any(amplitudes > 1.0):
            raise ValueError("amplitudes must lie in [0, 1]")
        return TransducerArray(self.positions.copy(), self.normals.copy(), amplitudes)


@dataclass(frozen=True)
class Workspace:
    """Cubic interaction volume above the array.

    start_point: where every guidance trial begins, mm.
    half_extent: half side length of the cube, mm.
    """

    start_point: np.ndarray
    half_extent: float = DEFAULT_HALF_EXTENT_MM

    def __post_init__(self) -> None:
        object.__setattr__(self, "start_point", np.asarray(self.start_point, dtype=float))
        if self.start_point.shape != (3,):
            raise ValueError("start_point must be a 3-vector")
        if self.half_extent <= 0.0:
            raise ValueError("half_extent must be positive")


def tiled_layout(nx: int = 2, ny: int = 3, unit_size: tuple[float, float] = UNIT_SIZE_MM,
                 grid: UnitGrid | None = None) -> ArrayLayout:
    """Gap-free nx-by-ny tiling of units, centred on the origin."""
    if nx < 1 or ny < 1:
        raise LayoutError("tiling must contain at least one unit")
    w, h = unit_size
    origins = tuple(
        ((ix + 0.5) * w - nx * w / 2.0, (iy + 0.5) * h - ny * h / 2.0)
        for iy in range(ny)
        for ix in range(nx)
    )
    return ArrayLayout(unit_origins=origins, unit_size=unit_size, grid=grid or UnitGrid())


def default_layout() -> ArrayLayout:
    """Six units in the 2x3 tiling: 1512 transducers over 410.0 x 454.2 mm."""
    return tiled_layout(2, 3)


def _footprints_overlap(a: tuple[float, float], b: tuple[float, float],
                        size: tuple[float, float]) -> bool:
    # Interior intersection only; shared edges are a legal tiling.
    eps = 1e-9
    return (abs(a[0] - b[0]) < size[0] - eps) and (abs(a[1] - b[1]) < size[1] - eps)


def build_array(layout: ArrayLayout) -> TransducerArray:
    """Instantiate every transducer of `layout` on the z = 0 plane.

    Raises LayoutError for empty grids, non-positive pitch, unit footprints
    that overlap, or a grid that spills outside its unit footprint.
    """
    g = layout.grid
    if g.rows < 1 or g.cols < 1:
        raise LayoutError("unit grid must be at least 1x1")
    if g.pitch <= 0.0:
        raise LayoutError("pitch must be positive")
    if not layout.unit_origins:
        raise LayoutError("layout has no units")

    w, h = layout.unit_size
    span_x = (g.cols - 1) * g.pitch
    span_y = (g.rows - 1) * g.pitch
    if span_x > w + 1e-9 or span_y > h + 1e-9:
        raise LayoutError(
            f"grid span {span_x:.2f} x {span_y:.2f} mm exceeds unit footprint {w} x {h} mm"
        )

    origins = layout.unit_origins
    for i in range(len(origins)):
        for j in range(i + 1, len(origins)):
            if _footprints_overlap(origins[i], origins[j], layout.unit_size):
                raise LayoutError(f"unit footprints {i} and {j} overlap")

    cols = (np.arange(g.cols) - (g.cols - 1) / 2.0) * g.pitch
    rows = (np.arange(g.rows) - (g.rows - 1) / 2.0) * g.pitch
    gx, gy = np.meshgrid(cols, rows)
    unit_xy = np.column_stack([gx.ravel(), gy.ravel()])  # (rows*cols, 2)

    xy = np.vstack([unit_xy + np.array([ox, oy]) for (ox, oy) in origins])
    positions = np.column_stack([xy, np.zeros(len(xy))])
    normals = np.tile(np.array([0.0, 0.0, 1.0]), (len(xy), 1))
    amplitudes = np.ones(len(xy))
    return TransducerArray(positions, normals, amplitudes)


def array_center(array: TransducerArray) -> np.ndarray:
    """Mean transducer position; the origin of the workspace frame (z = 0)."""
    if len(array) == 0:
        raise ValueError("array is empty")
    return array.positions.mean(axis=0)


def default_workspace(array: TransducerArray | None = None) -> Workspace:
    """Workspace starting `DEFAULT_START_HEIGHT_MM` above the array centre."""
    center = array_center(array) if array is not None else np.zeros(3)
    return Workspace(start_point=center + np.array([0.0, 0.0, DEFAULT_START_HEIGHT_MM]))


def load_layout(path: str | Path) -> ArrayLayout:
    """Read an ArrayLayout from a JSON file.

    Recognised keys (all optional, defaults fill the rest):
      units: list of [x, y] footprint centres, mm
      unit_size: [width, height], mm
      grid: {"rows": int, "cols": int, "pitch": float}
    """
    raw = json.loads(Path(path).read_text())
    grid_raw = raw.get("grid", {})
    grid = UnitGrid(
        rows=int(grid_raw.get("rows", UNIT_ROWS)),
        cols=int(grid_raw.get("cols", UNIT_COLS)),
        pitch=float(grid_raw.get("pitch", TRANSDUCER_PITCH_MM)),
    )
    if "units" in raw:
        origins = tuple((float(x), float(y)) for x, y in raw["units"])
        unit_size = tuple(raw.get("unit_size", UNIT_SIZE_MM))
        return ArrayLayout(unit_origins=origins, unit_size=(unit_size[0], unit_size[1]), grid=grid)
    return tiled_layout(grid=grid)
