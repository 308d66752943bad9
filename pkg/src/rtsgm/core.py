"""Shared domain types: images, cost volumes, disparity maps and configuration.

All arrays are stored row-major. Cost volumes use (y, x, d) order with the
disparity axis contiguous, so per-pixel minimum searches touch one cache line.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

MAX_DISPARITY_COUNT = 256
SATURATED_COST = 255

COST_FUNCTIONS = ("census5x5", "census9x7", "ncc5x5", "ncc9x9")
CONSISTENCY_MODES = ("off", "approximate", "exact")

# (width, height) of the matching window for each cost function
WINDOW_SIZES = {
    "census5x5": (5, 5),
    "census9x7": (9, 7),
    "ncc5x5": (5, 5),
    "ncc9x9": (9, 9),
}

# census 9x7 tuned on KITTI, census 5x5 on Middlebury; NCC rescaled to 0..255 cells
DEFAULT_PENALTIES = {
    "census5x5": (11, 39),
    "census9x7": (27, 86),
    "ncc5x5": (23, 224),
    "ncc9x9": (23, 224),
}


class ConfigError(ValueError):
    """Raised when a configuration or an input pair fails validation.

    ``errors`` holds every violated rule, not just the first.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def _frozen(array: np.ndarray, source=None) -> np.ndarray:
    # never freeze an array the caller still owns
    if source is not None and np.shares_memory(array, source) and source.flags.writeable:
        array = array.copy()
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class GrayImage:
    """8-bit rectified grayscale frame, shape (height, width)."""

    data: np.ndarray

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.uint8)
        if data.ndim != 2:
            raise ValueError(f"GrayImage needs a 2-D array, got shape {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError("GrayImage must be at least 1x1")
        object.__setattr__(self, "data", _frozen(data, self.data))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def mirrored(self) -> "GrayImage":
        return GrayImage(self.data[:, ::-1])


@dataclass(frozen=True)
class DisparityRange:
    min_disparity: int = 0
    max_disparity: int = 127

    def __post_init__(self):
        if not 0 <= self.min_disparity <= self.max_disparity:
            raise ConfigError(
                f"disparity range must satisfy 0 <= min <= max, got "
                f"[{self.min_disparity}, {self.max_disparity}]"
            )

    @property
    def count(self) -> int:
        return self.max_disparity - self.min_disparity + 1


@dataclass(frozen=True)
class CostVolume:
    """Matching costs S(p, d) as a uint8 array of shape (height, width, |range|)."""

    costs: np.ndarray
    range: DisparityRange
    max_cell_cost: int = SATURATED_COST

    def __post_init__(self):
        costs = np.ascontiguousarray(self.costs)
        if costs.ndim != 3 or costs.shape[2] != self.range.count:
            raise ValueError(
                f"cost array shape {costs.shape} does not match |range|={self.range.count}"
            )
        object.__setattr__(self, "costs", _frozen(costs, self.costs))

    @property
    def height(self) -> int:
        return self.costs.shape[0]

    @property
    def width(self) -> int:
        return self.costs.shape[1]


@dataclass(frozen=True)
class AggregatedCostVolume:
    """Summed path costs, uint32 cells, same layout as :class:`CostVolume`."""

    costs: np.ndarray
    range: DisparityRange

    def __post_init__(self):
        costs = np.ascontiguousarray(self.costs, dtype=np.uint32)
        if costs.ndim != 3 or costs.shape[2] != self.range.count:
            raise ValueError(
                f"aggregated array shape {costs.shape} does not match |range|={self.range.count}"
            )
        object.__setattr__(self, "costs", _frozen(costs, self.costs))

    @property
    def height(self) -> int:
        return self.costs.shape[0]

    @property
    def width(self) -> int:
        return self.costs.shape[1]


@dataclass(frozen=True)
class DisparityMap:
    """Per-pixel disparity in pixels with an explicit validity mask.

    Values at invalid pixels carry no meaning; use :meth:`get` or mask with
    ``valid`` before reading them.
    """

    values: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        valid = np.ascontiguousarray(self.valid, dtype=bool)
        if values.ndim != 2 or values.shape != valid.shape:
            raise ValueError(
                f"values {values.shape} and valid {valid.shape} must be equal 2-D shapes"
            )
        # invalid cells are zeroed so equal maps compare equal bytewise
        if not valid.all():
            values = np.where(valid, values, 0.0)
        object.__setattr__(self, "values", _frozen(values, self.values))
        object.__setattr__(self, "valid", _frozen(valid, self.valid))

    @classmethod
    def dense(cls, values) -> "DisparityMap":
        values = np.asarray(values, dtype=np.float64)
        return cls(values, np.ones(values.shape, dtype=bool))

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def get(self, x: int, y: int) -> Optional[float]:
        if not self.valid[y, x]:
            return None
        return float(self.values[y, x])

    def invalidate(self, mask) -> "DisparityMap":
        """Return a copy with every pixel selected by ``mask`` marked invalid."""
        return DisparityMap(self.values, self.valid & ~np.asarray(mask, dtype=bool))

    def mirrored(self) -> "DisparityMap":
        return DisparityMap(self.values[:, ::-1], self.valid[:, ::-1])

    def same_as(self, other: "DisparityMap") -> bool:
        return (
            self.values.shape == other.values.shape
            and np.array_equal(self.valid, other.valid)
            and np.array_equal(self.values, other.values)
        )


@dataclass(frozen=True)
class PipelineConfig:
    cost_function: str = "census9x7"
    range: DisparityRange = field(default_factory=DisparityRange)
    p1: Optional[int] = None
    p2: Optional[int] = None
    paths: int = 8
    subpixel: bool = True
    consistency: str = "approximate"
    consistency_threshold: float = 1.0
    median: bool = True
    workers: int = 1
    normalize: bool = True

    def __post_init__(self):
        # penalties default per cost function
        default_p1, default_p2 = DEFAULT_PENALTIES.get(self.cost_function, (None, None))
        if self.p1 is None:
            object.__setattr__(self, "p1", default_p1)
        if self.p2 is None:
            object.__setattr__(self, "p2", default_p2)

    @property
    def window(self) -> tuple[int, int]:
        return WINDOW_SIZES[self.cost_function]

    def with_(self, **changes) -> "PipelineConfig":
        return replace(self, **changes)


def cell_index(x: int, y: int, d: int, width: int, height: int, rng: DisparityRange) -> int:
    """Linear index of cell (x, y, d) in a (y, x, d) volume."""
    if not (0 <= x < width and 0 <= y < height and rng.min_disparity <= d <= rng.max_disparity):
        raise IndexError(
            f"cell ({x}, {y}, {d}) outside {width}x{height} "
            f"[{rng.min_disparity}, {rng.max_disparity}]"
        )
    return (y * width + x) * rng.count + (d - rng.min_disparity)


def validate_config(cfg: PipelineConfig, left: GrayImage, right: GrayImage) -> PipelineConfig:
    """Check ``cfg`` against an input pair; raise :class:`ConfigError` listing every problem."""
    errors = []
    if cfg.cost_function not in COST_FUNCTIONS:
        errors.append(f"unknown cost function {cfg.cost_function!r}")
    if (left.width, left.height) != (right.width, right.height):
        errors.append(
            f"dimension mismatch: left {left.width}x{left.height}, "
            f"right {right.width}x{right.height}"
        )
    if cfg.range.count > MAX_DISPARITY_COUNT:
        errors.append(f"disparity count {cfg.range.count} exceeds {MAX_DISPARITY_COUNT}")
    if cfg.p1 is None or cfg.p2 is None or not 0 < cfg.p1 < cfg.p2:
        errors.append(f"penalties must satisfy 0 < p1 < p2, got p1={cfg.p1}, p2={cfg.p2}")
    elif cfg.p2 > 65535:
        errors.append(f"p2={cfg.p2} exceeds 65535")
    if cfg.paths not in (4, 8):
        errors.append(f"paths must be 4 or 8, got {cfg.paths}")
    if cfg.consistency not in CONSISTENCY_MODES:
        errors.append(f"unknown consistency mode {cfg.consistency!r}")
    if cfg.consistency_threshold < 0:
        errors.append("consistency threshold must be >= 0")
    if cfg.workers < 1:
        errors.append(f"workers must be >= 1, got {cfg.workers}")
    if cfg.cost_function in WINDOW_SIZES:
        ww, wh = WINDOW_SIZES[cfg.cost_function]
        if left.width < ww or left.height < wh:
            errors.append(
                f"image {left.width}x{left.height} smaller than {ww}x{wh} window"
            )
    if errors:
        raise ConfigError(errors)
    return cfg
