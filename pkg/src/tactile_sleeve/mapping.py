"""Depth frame to 5x5 motor-grid mapping.

A depth frame (millimeter values, 0 = no data) is pooled into a 5x5 cell
grid matching the sleeve's motor layout, then each cell depth is turned
into a 12-bit vibration duty. Nearer obstacles vibrate harder; depths at
or beyond the far clip are silent. All operations are pure and
deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

GRID_SIZE = 5
GRID_CELLS = GRID_SIZE * GRID_SIZE
MAX_DUTY = 4095
NO_DATA = 0

CellDepth = Optional[Union[int, Fraction]]


class FrameTooSmallError(ValueError):
    """Raised when a depth frame is smaller than the 5x5 motor grid."""


class Mode(Enum):
    INDOOR = "indoor"
    OUTDOOR = "outdoor"


@dataclass(frozen=True)
class Aggregation:
    """Per-cell pooling rule applied to valid (nonzero) pixels.

    kind is one of "min_valid", "mean_valid", "percentile".  Percentile
    uses lower interpolation on the sorted valid values (index
    floor(p * (n - 1))), so the result is always an actual pixel value.
    """

    kind: str
    p: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("min_valid", "mean_valid", "percentile"):
            raise ValueError(f"unknown aggregation kind: {self.kind!r}")
        if self.kind == "percentile":
            if self.p is None or not (0.0 < self.p < 1.0):
                raise ValueError("percentile requires p in (0, 1)")
        elif self.p is not None:
            raise ValueError(f"{self.kind} takes no parameter")

    @classmethod
    def min_valid(cls) -> "Aggregation":
        return cls("min_valid")

    @classmethod
    def mean_valid(cls) -> "Aggregation":
        return cls("mean_valid")

    @classmethod
    def percentile(cls, p: float) -> "Aggregation":
        return cls("percentile", p)

    def __str__(self) -> str:
        if self.kind == "percentile":
            return f"percentile({self.p:g})"
        return self.kind

    @classmethod
    def parse(cls, text: str) -> "Aggregation":
        text = text.strip()
        if text.startswith("percentile(") and text.endswith(")"):
            return cls.percentile(float(text[len("percentile("):-1]))
        return cls(text)

    def apply(self, valid: Sequence[int]) -> CellDepth:
        """Pool a non-empty list of valid pixel depths into one value."""
        if self.kind == "min_valid":
            return int(min(valid))
        if self.kind == "mean_valid":
            return Fraction(int(sum(valid)), len(valid))
        vals = sorted(int(v) for v in valid)
        return vals[math.floor(self.p * (len(vals) - 1))]


@dataclass(frozen=True)
class MappingConfig:
    """Depth-to-intensity mapping parameters.

    nodata_max flips the treatment of cells with no valid pixels from
    "silent" to "maximum duty" (unknown = danger).
    """

    mode: Mode = Mode.INDOOR
    near_clip_mm: int = 300
    far_clip_mm: int = 3000
    levels: int = 8
    aggregation: Aggregation = field(default_factory=lambda: Aggregation.percentile(0.10))
    max_duty: int = MAX_DUTY
    nodata_max: bool = False

    def __post_init__(self):
        if not (0 < self.near_clip_mm < self.far_clip_mm):
            raise ValueError("need 0 < near_clip_mm < far_clip_mm")
        if self.levels < 2:
            raise ValueError("levels must be >= 2")
        if self.max_duty < 1:
            raise ValueError("max_duty must be positive")

    @classmethod
    def indoor(cls, **kw) -> "MappingConfig":
        return cls(mode=Mode.INDOOR, near_clip_mm=300, far_clip_mm=3000, **kw)

    @classmethod
    def outdoor(cls, **kw) -> "MappingConfig":
        # Far clip beyond 6 m is unreliable on small stereo depth units.
        return cls(mode=Mode.OUTDOOR, near_clip_mm=2000, far_clip_mm=6000, **kw)

    def to_text(self) -> str:
        lines = [
            f"mode = {self.mode.value}",
            f"near_clip_mm = {self.near_clip_mm}",
            f"far_clip_mm = {self.far_clip_mm}",
            f"levels = {self.levels}",
            f"aggregation = {self.aggregation}",
            f"max_duty = {self.max_duty}",
            f"nodata_max = {'true' if self.nodata_max else 'false'}",
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "MappingConfig":
        kw = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key == "mode":
                kw["mode"] = Mode(value)
            elif key in ("near_clip_mm", "far_clip_mm", "levels", "max_duty"):
                kw[key] = int(value)
            elif key == "aggregation":
                kw["aggregation"] = Aggregation.parse(value)
            elif key == "nodata_max":
                kw["nodata_max"] = value.lower() in ("true", "1", "yes")
            else:
                raise ValueError(f"line {lineno}: unknown key {key!r}")
        return cls(**kw)


@dataclass(frozen=True)
class DepthFrame:
    """A width x height depth image in millimeters, 0 meaning no data."""

    width: int
    height: int
    depths: np.ndarray  # uint16, shape (height, width), row-major
    timestamp_ms: int = 0

    def __post_init__(self):
        if self.width < GRID_SIZE or self.height < GRID_SIZE:
            raise FrameTooSmallError(
                f"frame {self.width}x{self.height} is smaller than "
                f"{GRID_SIZE}x{GRID_SIZE}"
            )
        arr = np.asarray(self.depths, dtype=np.uint16).reshape(self.height, self.width)
        arr.setflags(write=False)
        object.__setattr__(self, "depths", arr)

    @classmethod
    def from_flat(cls, width: int, height: int, flat: Sequence[int],
                  timestamp_ms: int = 0) -> "DepthFrame":
        if len(flat) != width * height:
            raise ValueError("flat length must equal width * height")
        return cls(width, height,
                   np.asarray(flat, dtype=np.uint16).reshape(height, width),
                   timestamp_ms)


@dataclass(frozen=True)
class CellDepths:
    """5x5 pooled depths, row-major, index 0 top-left; None = no data."""

    cells: tuple

    def __post_init__(self):
        if len(self.cells) != GRID_CELLS:
            raise ValueError(f"need exactly {GRID_CELLS} cells")

    def cell(self, row: int, col: int) -> CellDepth:
        return self.cells[row * GRID_SIZE + col]


@dataclass(frozen=True)
class MotorGrid:
    """5x5 motor duties, row-major, each in [0, 4095]."""

    intensities: tuple

    def __post_init__(self):
        if len(self.intensities) != GRID_CELLS:
            raise ValueError(f"need exactly {GRID_CELLS} intensities")
        for v in self.intensities:
            if not isinstance(v, int) or not (0 <= v <= MAX_DUTY):
                raise ValueError(f"intensity {v!r} out of [0, {MAX_DUTY}]")

    @classmethod
    def zero(cls) -> "MotorGrid":
        return cls((0,) * GRID_CELLS)

    def intensity(self, row: int, col: int) -> int:
        return self.intensities[row * GRID_SIZE + col]

    def rows(self):
        for r in range(GRID_SIZE):
            yield self.intensities[r * GRID_SIZE:(r + 1) * GRID_SIZE]


def cell_bounds(size: int, index: int) -> tuple:
    """Half-open pixel range [lo, hi) of grid slot `index` along one axis."""
    lo = (index * size) // GRID_SIZE
    hi = ((index + 1) * size) // GRID_SIZE
    return lo, hi


def downsample(frame: DepthFrame, config: MappingConfig) -> CellDepths:
    """Pool the frame into 5x5 cell depths using config.aggregation.

    Only nonzero pixels count; a cell with no valid pixel is no-data.
    """
    cells = []
    for r in range(GRID_SIZE):
        r0, r1 = cell_bounds(frame.height, r)
        for c in range(GRID_SIZE):
            c0, c1 = cell_bounds(frame.width, c)
            block = frame.depths[r0:r1, c0:c1]
            valid = block[block != NO_DATA]
            if valid.size == 0:
                cells.append(None)
            else:
                cells.append(config.aggregation.apply(valid.tolist()))
    return CellDepths(tuple(cells))


def intensity_for_depth(depth: CellDepth, config: MappingConfig) -> int:
    """Duty for one cell depth.

    Depths at or inside the near clip saturate (indoor mode); outdoor
    mode instead silences anything nearer than the near clip, since that
    range is covered by the cane. Between the clips the duty falls
    linearly with distance and is snapped to `levels` equispaced steps.
    Exact rational arithmetic keeps the step boundaries bit-stable.
    """
    if depth is None:
        return config.max_duty if config.nodata_max else 0
    d = Fraction(depth)
    near = Fraction(config.near_clip_mm)
    far = Fraction(config.far_clip_mm)
    if config.mode is Mode.OUTDOOR and d < near:
        return 0
    if d <= near:
        return config.max_duty
    if d >= far:
        return 0
    raw = Fraction(config.max_duty) * (far - d) / (far - near)
    step = math.floor(raw * config.levels / (config.max_duty + 1))
    value = Fraction(step * config.max_duty, config.levels - 1)
    return math.floor(value + Fraction(1, 2))


def map_intensity(cells: CellDepths, config: MappingConfig) -> MotorGrid:
    """Turn pooled cell depths into a motor grid."""
    return MotorGrid(tuple(intensity_for_depth(d, config) for d in cells.cells))


def process_frame(frame: DepthFrame, config: MappingConfig) -> MotorGrid:
    """Full pipeline: depth frame in, motor grid out."""
    return map_intensity(downsample(frame, config), config)


__all__ = [
    "GRID_SIZE", "GRID_CELLS", "MAX_DUTY", "NO_DATA",
    "Aggregation", "CellDepths", "DepthFrame", "FrameTooSmallError",
    "MappingConfig", "Mode", "MotorGrid",
    "cell_bounds", "downsample", "intensity_for_depth", "map_intensity",
    "process_frame", "replace",
]
